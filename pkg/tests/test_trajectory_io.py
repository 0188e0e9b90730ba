import numpy as np
import pandas as pd
import pytest

from geodissip import models, trajectory_io
from geodissip.integrate import FlowSpec, TrajectorySample, integrate


def assert_frames_equal(left, right):
    pd.testing.assert_frame_equal(left, right, check_exact=True, check_dtype=False)


def make_samples(count=5):
    samples = []

    for j in range(count):
        t = 0.1 * j
        samples.append(
            TrajectorySample(
                t=t,
                x=np.array([np.cos(t), np.sin(t) / 3.0, 1.0 / 7.0]),
                F_values=np.array([1.0 + t**2 / 11.0]),
                G_value=-np.sin(t) / 3.0,
                det_sigma_full=np.pi * (1.0 + t),
                G_rate_fd=np.exp(-t) / 9.0,
            )
        )

    return samples


@pytest.fixture
def ll_trajectory():
    ll = models.LandauLifschitzModel()
    spec = FlowSpec(
        x0=[1.0, 0.0, 0.0],
        t0=0.0,
        t1=0.05,
        dt=1e-2,
        base=models.base_field(ll),
        problem=ll.problem(),
        mode="v0",
        closed_form=models.dissipation(ll),
    )
    return integrate(spec)


def test_columns():
    assert trajectory_io.columns(3, 2) == [
        "t",
        "x1",
        "x2",
        "x3",
        "F1",
        "F2",
        "G",
        "detSigma_full",
        "dG_dt_fd",
    ]


def test_to_frame():
    frame = trajectory_io.to_frame(make_samples())

    assert list(frame.columns) == trajectory_io.columns(3, 1)
    assert len(frame) == 5
    assert frame["t"].tolist() == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4])


def test_to_frame_empty():
    frame = trajectory_io.to_frame([])

    assert frame.empty
    assert list(frame.columns) == ["t", "G", "detSigma_full", "dG_dt_fd"]


@pytest.mark.parametrize("format", ["csv", "jsonl"])
def test_write_read_is_exact(tmp_directory, format):
    samples = make_samples()
    path = trajectory_io.write(samples, f"trajectory.{format}", format=format)

    assert path.exists()
    assert_frames_equal(trajectory_io.read(path), trajectory_io.to_frame(samples))


def test_csv_has_header(tmp_directory):
    path = trajectory_io.write(make_samples(), "trajectory.csv")
    header = path.read_text().splitlines()[0]

    assert header == "t,x1,x2,x3,F1,G,detSigma_full,dG_dt_fd"


def test_jsonl_one_record_per_line(tmp_directory):
    path = trajectory_io.write(make_samples(3), "trajectory.jsonl", format="jsonl")
    lines = path.read_text().splitlines()

    assert len(lines) == 3
    assert lines[0].startswith('{"t": 0.0, "x1": 1.0')


def test_read_explicit_format(tmp_directory):
    samples = make_samples()
    path = trajectory_io.write(samples, "trajectory.txt", format="jsonl")

    frame = trajectory_io.read(path, format="jsonl")

    assert_frames_equal(frame, trajectory_io.to_frame(samples))


@pytest.mark.parametrize("stride, expected", [(1, 5), (2, 3), (4, 2), (10, 1)])
def test_stride(tmp_directory, stride, expected):
    path = trajectory_io.write(make_samples(), "trajectory.csv", stride=stride)
    frame = trajectory_io.read(path)

    assert len(frame) == expected
    assert frame["t"].iloc[0] == 0.0


def test_nan_survives_round_trip(tmp_directory, ll_trajectory):
    ll_trajectory[0].G_rate_fd = float("nan")
    path = trajectory_io.write(ll_trajectory, "trajectory.csv")

    frame = trajectory_io.read(path)

    assert np.isnan(frame["dG_dt_fd"].iloc[0])
    assert_frames_equal(frame, trajectory_io.to_frame(ll_trajectory))


@pytest.mark.parametrize("format", ["parquet", "CSV", ""])
def test_write_rejects_unknown_format(tmp_directory, format):
    with pytest.raises(ValueError, match="is not a valid output format"):
        trajectory_io.write(make_samples(), "trajectory.out", format=format)


@pytest.mark.parametrize("stride", [0, -1])
def test_write_rejects_bad_stride(tmp_directory, stride):
    with pytest.raises(ValueError, match="stride must be a positive integer"):
        trajectory_io.write(make_samples(), "trajectory.csv", stride=stride)


def test_read_rejects_unknown_format(tmp_directory):
    path = trajectory_io.write(make_samples(), "trajectory.csv")

    with pytest.raises(ValueError, match="is not a valid input format"):
        trajectory_io.read(path, format="xml")


def test_load(tmp_directory, ll_trajectory):
    path = trajectory_io.write(ll_trajectory, "trajectory.jsonl", format="jsonl")
    loaded = trajectory_io.load(path)

    assert len(loaded) == len(ll_trajectory)

    for original, sample in zip(ll_trajectory, loaded):
        assert sample.t == original.t
        np.testing.assert_array_equal(sample.x, original.x)
        np.testing.assert_array_equal(sample.F_values, original.F_values)
        assert sample.G_value == original.G_value
        assert np.isnan(sample.rate_target)


def test_to_samples_with_rate_column():
    frame = trajectory_io.to_frame(make_samples(2))
    frame["expected_rate"] = [0.5, 0.25]

    samples = trajectory_io.to_samples(frame, rate_target="expected_rate")

    assert [s.rate_target for s in samples] == [0.5, 0.25]
