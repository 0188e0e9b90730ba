"""
Structured logging for public operations
"""
import inspect
import logging
from functools import wraps

logger = logging.getLogger("geodissip")
logger.addHandler(logging.NullHandler())


class GeodissipLogger:
    @classmethod
    def log(cls, action=None, feature=None):
        """Logs the function call and then runs it

        Parameters
        ----------
        action : string, default=None
            The desired action to be logged (i.e: 'v0', 'integrate').
            If `action=None` it will log the function's name.

        feature: string, default=None
            The main feature (i.e: 'control', 'exterior', 'leafgeom', 'cli')
        """

        def wrapper(func):
            @wraps(func)
            def inner(*args, **kwargs):
                metadata = cls._prepare_metadata(func, action, feature, *args, **kwargs)
                logger.debug("%s %s", metadata["action"], metadata)

                try:
                    result = func(*args, **kwargs)
                except Exception as e:
                    metadata["exception"] = str(e)
                    logger.warning(
                        "%s failed: %s",
                        metadata["action"],
                        e,
                        extra={"metadata": metadata},
                    )
                    raise e

                return result

            return inner

        return wrapper

    @staticmethod
    def _arguments_with_defaults(func, *args, **kwargs):
        sig = inspect.signature(func)
        bound = sig.bind(*args, **kwargs)
        bound.apply_defaults()

        # points, fields and matrices have no defaults and are left out
        return {
            name: bound.arguments[name]
            for name, param in sig.parameters.items()
            if param.default is not inspect.Parameter.empty
        }

    @classmethod
    def _prepare_metadata(cls, func, action, feature, *args, **kwargs):
        metadata = {"action": action or func.__name__, "feature": feature}
        args_to_log = cls._arguments_with_defaults(func, *args, **kwargs)

        if args_to_log:
            metadata["args"] = args_to_log

        return metadata


def configure(verbose=False, stream=None):
    """Attach a stderr handler to the package logger (used by the CLI)"""
    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers = [h for h in logger.handlers if isinstance(h, logging.NullHandler)]
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    return logger
