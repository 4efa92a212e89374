import pytest
from dataclasses import replace
from hypothesis import given, strategies as st

from psmsat.phy import (
    PhyParams, complete_durations, expected_pspoll_service_time, frame_durations, frame_time, to_ns,
)


def test_table_defaults():
    d = frame_durations(PhyParams())
    assert d.t_ack == 248.0  # 144 + 48 + 112/2
    assert d.t_ap_data == pytest.approx(192 + 546 * 8 / 11, abs=1e-12)
    assert d.t_ap_data == pytest.approx(589.0909, abs=1e-4)
    assert d.t_pspl == 272.0
    assert d.t_s_pspl == 580.0  # 272 + 10 + 50 + 248
    assert d.t_s_sta == pytest.approx(10 + 50 + 248 + d.t_sta_data)
    assert d.t_c == pytest.approx(d.t_ap_data + 364)
    assert d.t_s_ap is None


def test_zero_length_frame():
    assert frame_time(0, 0, 0, 2.0) == 0.0


@pytest.mark.parametrize("field, value", [
    ("data_rate", 0), ("control_rate", -1.0), ("slot_time", 0), ("ack_bytes", 0),
])
def test_rejects_non_positive(field, value):
    with pytest.raises(ValueError):
        replace(PhyParams(), **{field: value})


def test_rejects_inconsistent_ifs_and_rates():
    with pytest.raises(ValueError):
        PhyParams(control_rate=20.0)
    with pytest.raises(ValueError):
        PhyParams(difs=5.0)
    with pytest.raises(ValueError):
        PhyParams(eifs=40.0)


def test_pspoll_service_time():
    d = frame_durations(PhyParams())
    assert expected_pspoll_service_time(d, 1.0, 20.0) == d.t_s_pspl
    assert expected_pspoll_service_time(d, 0.5, 20.0) == 600.0
    with pytest.raises(ValueError):
        expected_pspoll_service_time(d, 0.0, 20.0)


def test_complete_durations_adds_pspoll_to_ap_success():
    p = PhyParams()
    d = complete_durations(frame_durations(p), 0.5, p)
    assert d.e_t_pspl == 600.0
    assert d.t_s_ap == pytest.approx(p.sifs + p.difs + d.t_ack + d.t_ap_data + 600.0)
    assert d.t_s_ap >= d.t_s_sta


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_pspoll_time_decreasing(b1, b2):
    d = frame_durations(PhyParams())
    lo, hi = sorted((b1, b2))
    if lo < hi:
        assert expected_pspoll_service_time(d, lo, 20.0) > expected_pspoll_service_time(d, hi, 20.0)


@given(st.integers(1, 4000), st.integers(0, 500))
def test_monotone_in_payload(payload, extra):
    a = frame_durations(PhyParams(ap_payload_bytes=payload, sta_payload_bytes=payload))
    b = frame_durations(PhyParams(ap_payload_bytes=payload + extra, sta_payload_bytes=payload + extra))
    for name in ("t_ap_data", "t_sta_data", "t_s_sta", "t_c"):
        assert getattr(b, name) >= getattr(a, name)


@given(st.floats(2.0, 54.0), st.floats(0.0, 50.0))
def test_monotone_in_rate(rate, bump):
    a = frame_durations(PhyParams(data_rate=rate))
    b = frame_durations(PhyParams(data_rate=rate + bump))
    assert b.t_ap_data <= a.t_ap_data
    assert b.t_c <= a.t_c


def test_deterministic_and_ns_rounding():
    assert frame_durations(PhyParams()) == frame_durations(PhyParams())
    assert to_ns(589.0909090909) == 589091
    assert to_ns(20.0) == 20000
