import itertools
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrobench.errors import FormatError, InsufficientDataError, SourceError
from entrobench.telemetry import (
    CallablePowerSource,
    EnergyCounterSource,
    PowerSample,
    ReplaySource,
    Timeline,
    parse_pm_counters,
    parse_power_csv,
    read_timeline,
    sample_loop,
    timeline_from_text,
    timeline_to_text,
    write_timeline,
)

SMI_CSV = """\
timestamp, power.draw [W]
2022/09/01 10:00:00.000, 238.51 W
2022/09/01 10:00:00.100, 240.00 W
2022/09/01 10:00:00.250, N/A
2022/09/01 10:00:00.300, 398.20 W
"""


def test_parse_power_csv_basic():
    tl = parse_power_csv(SMI_CSV)
    assert len(tl) == 3
    assert tl.skipped_rows == 1
    assert [s.t_ms for s in tl.samples] == [0.0, 100.0, 300.0]
    assert [s.watts for s in tl.samples] == [238.51, 240.0, 398.2]


def test_parse_power_csv_no_subsecond_stamp():
    tl = parse_power_csv(
        "timestamp, power.draw [W]\n"
        "2022/09/01 10:00:01, 100 W\n"
        "2022/09/01 10:00:03, 120 W\n"
    )
    assert [s.t_ms for s in tl.samples] == [0.0, 2000.0]


def test_parse_power_csv_rejects_bad_header():
    with pytest.raises(FormatError):
        parse_power_csv("time,value\n1,2\n")
    with pytest.raises(FormatError):
        parse_power_csv("")


def test_parse_power_csv_all_unavailable():
    with pytest.raises(InsufficientDataError):
        parse_power_csv(
            "timestamp, power.draw [W]\n"
            "2022/09/01 10:00:00.000, [Not Supported]\n"
        )


def test_parse_power_csv_bad_value_reports_line():
    with pytest.raises(FormatError) as err:
        parse_power_csv(
            "timestamp, power.draw [W]\n"
            "2022/09/01 10:00:00.000, watts\n"
        )
    assert "line 2" in str(err.value)


def test_parse_pm_counters():
    sample = parse_pm_counters("158 W 1663632013291527")
    assert sample.watts == 158.0
    assert sample.t_ms == 1663632013291527 / 1000.0
    assert sample.source == "pm_counters"


def test_parse_pm_counters_rejects_energy_unit():
    with pytest.raises(FormatError):
        parse_pm_counters("158 J 1")
    with pytest.raises(FormatError):
        parse_pm_counters("158 W")
    with pytest.raises(FormatError):
        parse_pm_counters("abc W 1")


def test_sample_rejects_negative():
    with pytest.raises(FormatError):
        PowerSample(t_ms=-1.0, watts=1.0, source="x")
    with pytest.raises(FormatError):
        PowerSample(t_ms=0.0, watts=-1.0, source="x")


def test_timeline_rejects_nonmonotone():
    good = PowerSample(t_ms=0.0, watts=1.0, source="x")
    bad = PowerSample(t_ms=0.0, watts=2.0, source="x")
    with pytest.raises(FormatError):
        Timeline(samples=(good, bad), source="x")


def make_timeline(pairs, **kw):
    return Timeline(
        samples=tuple(PowerSample(t_ms=t, watts=w, source="x") for t, w in pairs),
        source="x",
        **kw,
    )


def test_timeline_text_round_trip():
    tl = make_timeline([(0.0, 238.5), (100.0, 398.2), (200.5, 400.0)],
                       epoch=12.25, interval_ms=100.0)
    text = timeline_to_text(tl)
    back = timeline_from_text(text)
    assert back == tl
    assert timeline_to_text(back) == text


def test_timeline_file_round_trip(tmp_path):
    tl = make_timeline([(0.0, 1.0), (50.0, 2.0)])
    path = tmp_path / "tl.csv"
    write_timeline(tl, path)
    assert read_timeline(path) == tl


def test_timeline_text_rejects_unknown_schema_and_dupes():
    with pytest.raises(FormatError):
        timeline_from_text("# other-schema v9\nt_ms,watts,source\n")
    tl_text = (
        "# entrobench-timeline v1 source=x epoch=0.0 interval_ms=100.0\n"
        "t_ms,watts,source\n"
        "0.0,1.0,x\n"
        "0.0,2.0,x\n"
    )
    with pytest.raises(FormatError):
        timeline_from_text(tl_text)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(min_value=0.0, max_value=1e4,
                       allow_nan=False, allow_infinity=False),
             min_size=1, max_size=20),
)
def test_timeline_round_trip_property(watts):
    tl = make_timeline([(float(i) * 10.0, w) for i, w in enumerate(watts)])
    assert timeline_from_text(timeline_to_text(tl)) == tl


def test_replay_source_emitted_verbatim():
    pairs = [(0.0, 238.5), (100.0, 398.2)]
    tl = sample_loop(ReplaySource(pairs), 100.0, threading.Event())
    assert [(s.t_ms, s.watts) for s in tl.samples] == pairs
    assert tl.source == "replay"
    # Timeline input is also accepted
    tl2 = sample_loop(ReplaySource(tl, name="replay"), 100.0, threading.Event())
    assert tl2.samples == tl.samples


def test_sample_loop_records_values_then_stops():
    stop = threading.Event()
    counter = itertools.count()

    def read():
        n = next(counter)
        if n >= 3:
            stop.set()
        return 100.0 + n

    tl = sample_loop(CallablePowerSource(read, name="cb"), 1.0, stop)
    assert len(tl) >= 3
    assert tl.samples[0].watts == 100.0
    assert tl.gap_count == 0


def test_sample_loop_aborts_after_consecutive_failures():
    def read():
        raise OSError("device unplugged")

    with pytest.raises(SourceError):
        sample_loop(CallablePowerSource(read, name="cb"), 1.0, threading.Event())


def test_sample_loop_tolerates_intermittent_failures():
    stop = threading.Event()
    counter = itertools.count()

    def read():
        n = next(counter)
        if n >= 12:
            stop.set()
        if n % 2:
            raise OSError("flaky")
        return 50.0

    tl = sample_loop(CallablePowerSource(read, name="cb"), 1.0, stop)
    assert tl.gap_count >= 5
    assert all(s.watts == 50.0 for s in tl.samples)


def test_energy_counter_finite_difference(monkeypatch):
    import entrobench.telemetry as telemetry

    clock = iter([10.0, 10.1])
    monkeypatch.setattr(telemetry.time, "perf_counter", lambda: next(clock))
    joules = iter([1000.0, 1025.0])
    src = EnergyCounterSource(lambda: next(joules))
    with pytest.raises(telemetry.SourceGap):
        src.read()  # first read only establishes the baseline
    assert src.read() == pytest.approx(250.0)  # 25 J over 100 ms


def test_energy_counter_wrap_is_gap(monkeypatch):
    import entrobench.telemetry as telemetry

    clock = iter([0.0, 1.0, 2.0])
    monkeypatch.setattr(telemetry.time, "perf_counter", lambda: next(clock))
    joules = iter([1000.0, 5.0, 105.0])
    src = EnergyCounterSource(lambda: next(joules))
    with pytest.raises(telemetry.SourceGap):
        src.read()
    with pytest.raises(telemetry.SourceGap):
        src.read()  # counter went backwards: wrap, not a negative wattage
    assert src.read() == pytest.approx(100.0)


def test_energy_counter_scale(monkeypatch):
    import entrobench.telemetry as telemetry

    clock = iter([0.0, 1.0])
    monkeypatch.setattr(telemetry.time, "perf_counter", lambda: next(clock))
    uj = iter([0.0, 200_000_000.0])
    src = EnergyCounterSource(lambda: next(uj), scale=1e-6)
    with pytest.raises(telemetry.SourceGap):
        src.read()
    assert src.read() == pytest.approx(200.0)
