"""
Trajectory files: one row per sample with the columns
t, x1..xn, F1..Fk, G, detSigma_full, dG_dt_fd. CSV uses 17 significant digits
and JSONL the shortest round-trip representation, so reading a file back
reproduces every float exactly
"""
import json
from pathlib import Path

import pandas as pd

from geodissip.integrate import TrajectorySample
from geodissip.validate import choice

FORMATS = ("csv", "jsonl")
FLOAT_FORMAT = "%.17g"


def columns(dim, k):
    return (
        ["t"]
        + [f"x{i}" for i in range(1, dim + 1)]
        + [f"F{i}" for i in range(1, k + 1)]
        + ["G", "detSigma_full", "dG_dt_fd"]
    )


def to_frame(samples, stride=1):
    """Tabulate samples (every ``stride``-th one) as a data frame"""
    samples = list(samples)[::stride]

    if not samples:
        return pd.DataFrame(columns=["t", "G", "detSigma_full", "dG_dt_fd"])

    dim = samples[0].x.shape[0]
    k = samples[0].F_values.shape[0]
    rows = [
        [s.t, *s.x, *s.F_values, s.G_value, s.det_sigma_full, s.G_rate_fd]
        for s in samples
    ]
    return pd.DataFrame(rows, columns=columns(dim, k), dtype=float)


def write(samples, path, format="csv", stride=1):
    """Write a trajectory, returns the path"""
    choice("output format", format, FORMATS)

    if int(stride) < 1:
        raise ValueError(f"stride must be a positive integer, got {stride!r}")

    path = Path(path)
    frame = to_frame(samples, int(stride))

    if format == "csv":
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    else:
        lines = [
            json.dumps({key: float(value) for key, value in record.items()})
            for record in frame.to_dict(orient="records")
        ]
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    return path


def read(path, format=None):
    """Read a trajectory file back into a data frame"""
    path = Path(path)
    format = format or ("jsonl" if path.suffix == ".jsonl" else "csv")
    choice("input format", format, FORMATS)

    if format == "csv":
        return pd.read_csv(path, float_precision="round_trip")

    records = [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    return pd.DataFrame.from_records(records).astype(float)


def to_samples(frame, rate_target=None):
    """Samples from a data frame; ``rate_target`` names the expected-rate column"""
    xs = [c for c in frame.columns if c.startswith("x")]
    Fs = [c for c in frame.columns if c.startswith("F")]
    samples = []

    for _, row in frame.iterrows():
        samples.append(
            TrajectorySample(
                t=float(row["t"]),
                x=row[xs].to_numpy(dtype=float),
                F_values=row[Fs].to_numpy(dtype=float),
                G_value=float(row["G"]),
                det_sigma_full=float(row["detSigma_full"]),
                rate_target=(
                    float(row[rate_target]) if rate_target else float("nan")
                ),
                G_rate_fd=float(row["dG_dt_fd"]),
            )
        )

    return samples


def load(path, format=None, rate_target=None):
    return to_samples(read(path, format), rate_target)

