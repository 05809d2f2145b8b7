import numpy as np
import pytest

from csslearn.errors import OutputError
from csslearn.metrics import (
    CSV_COLUMNS,
    MetricsLog,
    StepRecord,
    cumulative_frame,
    detection_rates,
    emit_csv,
    metric_fractions,
    read_csv,
)


def record(**counts):
    base = dict(pu_collisions=0, busy_channels=0, su_collisions=0, su_attempts=0, missed_slots=0,
                idle_channels=0, sensing=0, detections=0, alive_frac=1.0)
    base.update(counts)
    return StepRecord(**base)


def test_fractions_example():
    log = MetricsLog(num_sus=10)
    for _ in range(50):
        log.append(record(busy_channels=5, su_attempts=4, idle_channels=5, sensing=30))
    for _ in range(5):
        log.append(record(pu_collisions=1, su_collisions=1, busy_channels=0, su_attempts=4,
                          missed_slots=1, idle_channels=10, sensing=30))
    f = metric_fractions(log, 50)
    assert f.pu_collision == 0.0
    assert f.avg_sensing == pytest.approx(3.0)
    f = metric_fractions(log, 55)
    assert f.pu_collision == pytest.approx(5 / 250)
    assert f.su_collision == pytest.approx(5 / 220)
    assert f.missed == pytest.approx(5 / 300)
    assert not f.flags


def test_zero_denominators_are_flagged():
    log = MetricsLog(num_sus=3)
    log.append(record(idle_channels=2))
    f = metric_fractions(log, 1)
    assert (f.pu_collision, f.su_collision, f.missed, f.avg_sensing) == (0.0, 0.0, 0.0, 0.0)
    assert f.flags == {"pu_collision", "su_collision"}


def test_step_outside_log():
    log = MetricsLog(num_sus=3)
    log.append(record())
    with pytest.raises(ValueError):
        metric_fractions(log, 0)
    with pytest.raises(ValueError):
        metric_fractions(log, 2)


def test_cumulative_frame_matches_fractions():
    rng = np.random.default_rng(8)
    log = MetricsLog(num_sus=4)
    for _ in range(40):
        busy = int(rng.integers(0, 6))
        attempts = int(rng.integers(0, 6 - busy + 1))
        log.append(record(pu_collisions=int(rng.integers(0, busy + 1)), busy_channels=busy,
                          su_collisions=0, su_attempts=attempts, missed_slots=int(rng.integers(0, 2)),
                          idle_channels=6 - busy, sensing=int(rng.integers(0, 25)),
                          alive_frac=float(rng.random()), mode="bh"))
    frame = cumulative_frame(log)
    assert list(frame.columns) == CSV_COLUMNS
    assert frame["step"].tolist() == list(range(1, 41))
    for step in (1, 17, 40):
        f = metric_fractions(log, step)
        row = frame.iloc[step - 1]
        assert row["pu_coll_frac"] == pytest.approx(f.pu_collision)
        assert row["su_coll_frac"] == pytest.approx(f.su_collision)
        assert row["missed_frac"] == pytest.approx(f.missed)
        assert row["avg_sensing"] == pytest.approx(f.avg_sensing)
    assert frame[CSV_COLUMNS[1:4]].to_numpy().min() >= 0.0
    assert frame[CSV_COLUMNS[1:4]].to_numpy().max() <= 1.0


def test_detection_rates():
    log = MetricsLog(num_sus=2)
    log.append(record(busy_channels=4, detections=3, idle_channels=6, missed_slots=1))
    log.append(record(busy_channels=4, detections=4, idle_channels=6, missed_slots=2))
    assert detection_rates(log) == pytest.approx((3 / 12, 7 / 8))


def test_empty_log_writes_header_only(tmp_path):
    path = emit_csv(MetricsLog(num_sus=5), tmp_path / "empty.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_csv_round_trip(tmp_path):
    log = MetricsLog(num_sus=3)
    for n in range(1, 30):
        log.append(record(pu_collisions=n % 2, busy_channels=3, su_attempts=2, su_collisions=n % 2,
                          idle_channels=2, missed_slots=int(n % 3 == 0), sensing=7, detections=2,
                          alive_frac=1.0 / n, mode="plain" if n % 5 else "bh"))
    path = emit_csv(log, tmp_path / "nested" / "run.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert all(len(line.split(",")) == 7 for line in lines)
    back = read_csv(path)
    frame = cumulative_frame(log)
    assert back["mode"].tolist() == frame["mode"].tolist()
    for column in CSV_COLUMNS[:6]:
        np.testing.assert_allclose(back[column].to_numpy(dtype=float),
                                   frame[column].to_numpy(dtype=float), rtol=1e-12, atol=0)


def test_write_errors_become_output_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        emit_csv(MetricsLog(num_sus=1), blocker / "run.csv")
    with pytest.raises(OutputError):
        read_csv(tmp_path / "missing.csv")
