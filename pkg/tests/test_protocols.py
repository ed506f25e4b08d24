import dataclasses
import json
import math

import numpy as np
import pytest

from squeeze_forge import (
    Constant,
    FrequencyProtocol,
    LinearRamp,
    ProtocolError,
    Sampled,
    Segment,
    Sinusoid,
    build_constant,
    build_janszky_adam,
    build_linear_ramp,
    build_sinusoidal,
    janszky_adam_switch_times,
    load_protocol,
    protocol_from_dict,
    protocol_to_dict,
    save_protocol,
    validate,
)


def mixed_protocol():
    return FrequencyProtocol((
        Segment(0.8, Constant(1.0)),
        Segment(1.2, LinearRamp(1.0, 1.6)),
        Segment(2.0, Sinusoid(1.6, 0.3, 2.0, 0.25)),
        Segment(1.0, Sampled((0.0, 0.4, 1.0), (1.6, 1.2, 1.4))),
    ))


# ---------------- builders ----------------


def test_janszky_adam_single_jump_structure():
    p = build_janszky_adam(1.0, 2.0, 1)
    assert len(p.segments) == 2
    assert p.segments[0].shape == Constant(1.0)
    assert p.segments[1].shape == Constant(2.0)
    # quarter periods, bit for bit
    assert p.segments[0].duration == math.pi / 2.0
    assert p.segments[1].duration == math.pi / 4.0
    assert p.omega_start == 1.0
    assert p.omega_end == 2.0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_janszky_adam_durations_are_exact_quarter_periods(n):
    p = build_janszky_adam(1.0, 2.0, n)
    assert len(p.segments) == n + 1
    quarters = {math.pi / 2.0, math.pi / 4.0}
    assert {seg.duration for seg in p.segments} <= quarters
    # alternation: even-indexed holds at omega0, odd-indexed at omega1
    for i, seg in enumerate(p.segments):
        assert seg.shape.omega == (1.0 if i % 2 == 0 else 2.0)


def test_janszky_adam_terminal_frequency_parity():
    assert build_janszky_adam(1.0, 2.0, 3).omega_end == 2.0
    # an even jump count necessarily lands back on the start frequency
    assert build_janszky_adam(1.0, 2.0, 4).omega_end == 1.0


def test_janszky_adam_equal_frequencies_is_constant():
    p = build_janszky_adam(1.0, 1.0, 3)
    t = np.linspace(0.0, p.total_duration, 50)
    assert np.all(p.omega_at(t) == 1.0)


def test_janszky_adam_switch_times_match_segment_starts():
    ts = janszky_adam_switch_times(1.0, 2.0, 3)
    p = build_janszky_adam(1.0, 2.0, 3)
    assert ts == p.segment_starts[1:]
    assert len(ts) == 3


def test_janszky_adam_rejects_bad_input():
    with pytest.raises(ProtocolError):
        build_janszky_adam(1.0, 2.0, 0)
    with pytest.raises(ProtocolError):
        build_janszky_adam(-1.0, 2.0, 1)


def test_sinusoidal_is_resonant_drive():
    p = build_sinusoidal(1.0, 2.0, 1.0)
    assert p.total_duration == pytest.approx(math.pi, rel=0, abs=0)
    t = np.linspace(0.0, math.pi, 40)
    expected = 1.0 + 0.5 * np.sin(2.0 * t)
    assert np.allclose(p.omega_at(t), expected, rtol=0, atol=1e-15)


def test_sinusoidal_equal_frequencies_is_constant():
    p = build_sinusoidal(1.0, 1.0, 5.0)
    t = np.linspace(0.0, p.total_duration, 31)
    assert np.all(p.omega_at(t) == 1.0)


def test_sinusoidal_rejects_nonpositive_sweep():
    # amplitude (4-1)/2 = 1.5 dips below zero
    with pytest.raises(ProtocolError):
        build_sinusoidal(1.0, 4.0, 1.0)


def test_sinusoidal_fractional_periods():
    p = build_sinusoidal(1.0, 2.0, 1.5)
    assert p.total_duration == pytest.approx(1.5 * math.pi)


def test_linear_ramp_midpoint():
    p = build_linear_ramp(1.0, 2.0, 10.0)
    assert p.omega_at(5.0) == pytest.approx(1.5, rel=0, abs=1e-15)
    assert p.omega_start == 1.0
    assert p.omega_end == 2.0


def test_constant_builder():
    p = build_constant(1.3, 4.0)
    assert p.omega_at(2.0) == 1.3
    assert p.total_duration == 4.0


# ---------------- evaluation conventions ----------------


def test_omega_at_right_limit_at_interior_jump():
    p = build_janszky_adam(1.0, 2.0, 2)
    t1, t2 = p.segment_starts[1:]
    assert p.omega_at(t1) == 2.0
    assert p.omega_at(t2) == 1.0


def test_omega_at_left_limit_at_tau():
    p = build_janszky_adam(1.0, 2.0, 2)
    assert p.omega_at(p.total_duration) == 1.0


def test_omega_at_rejects_times_outside_window():
    p = build_constant(1.0, 2.0)
    with pytest.raises(ValueError):
        p.omega_at(-0.1)
    with pytest.raises(ValueError):
        p.omega_at(2.1)
    with pytest.raises(ValueError):
        p.omega_at(np.array([0.5, 2.5]))


def test_omega_at_array_matches_scalar():
    p = mixed_protocol()
    t = np.linspace(0.0, p.total_duration, 113)
    arr = p.omega_at(t)
    scalars = np.array([p.omega_at(float(ti)) for ti in t])
    assert np.array_equal(arr, scalars)


def test_sampled_interpolation():
    seg = Sampled((0.0, 0.4, 1.0), (1.6, 1.2, 1.4))
    assert seg.omega_scalar(0.2, 1.0) == pytest.approx(1.4)
    assert seg.omega_scalar(0.7, 1.0) == pytest.approx(1.3)
    assert seg.omega_range(1.0) == (1.2, 1.6)


def test_sinusoid_range_uses_true_extrema():
    # window shorter than a period but containing the crest
    s = Sinusoid(1.0, 0.5, 2.0, 0.0)
    lo, hi = s.omega_range(math.pi / 2.0)  # phase sweeps [0, pi]
    assert hi == pytest.approx(1.5, rel=0, abs=1e-15)
    assert lo == pytest.approx(1.0, rel=0, abs=1e-15)
    # window that stops before the crest: endpoint is the max
    lo2, hi2 = s.omega_range(math.pi / 8.0)  # phase sweeps [0, pi/4]
    assert hi2 == pytest.approx(1.0 + 0.5 * math.sin(math.pi / 4.0))
    assert lo2 == pytest.approx(1.0)


# ---------------- validation ----------------


def test_segment_rejects_nonpositive_duration():
    with pytest.raises(ProtocolError):
        Segment(0.0, Constant(1.0))
    with pytest.raises(ProtocolError):
        Segment(-1.0, Constant(1.0))


def test_sampled_knot_validation():
    with pytest.raises(ProtocolError):
        Sampled((0.0, 0.5), (1.0,))  # length mismatch
    with pytest.raises(ProtocolError):
        Sampled((0.1, 0.5), (1.0, 1.0))  # must start at 0
    with pytest.raises(ProtocolError):
        Sampled((0.0, 0.5, 0.5), (1.0, 1.0, 1.0))  # not increasing
    with pytest.raises(ProtocolError):
        Segment(2.0, Sampled((0.0, 1.0), (1.0, 1.0)))  # knots end early


def test_protocol_rejects_nonpositive_frequency():
    with pytest.raises(ProtocolError):
        FrequencyProtocol((Segment(1.0, Constant(0.0)),))
    with pytest.raises(ProtocolError):
        FrequencyProtocol((Segment(1.0, LinearRamp(1.0, -0.5)),))
    with pytest.raises(ProtocolError):
        FrequencyProtocol((Segment(1.0, Sampled((0.0, 1.0), (1.0, 0.0))),))


def test_protocol_needs_segments():
    with pytest.raises(ProtocolError):
        FrequencyProtocol(())


def test_protocols_are_immutable():
    p = build_constant(1.0, 1.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        p.segments = ()
    with pytest.raises(dataclasses.FrozenInstanceError):
        p.segments[0].shape.omega = 2.0


def test_validate_reports_positivity_failure():
    report = validate({
        "segments": [
            {"kind": "ramp", "duration": 5.0, "omega_start": 1.0,
             "omega_end": 0.0},
        ],
    })
    assert not report.ok
    assert any("nonpositive" in f for f in report.failures)


def test_validate_reports_duration_mismatch():
    report = validate({
        "total_duration": 3.0,
        "segments": [{"kind": "constant", "duration": 2.0, "omega": 1.0}],
    })
    assert not report.ok
    assert any("total_duration" in f for f in report.failures)
    assert report.total_duration == pytest.approx(2.0)


def test_validate_reports_endpoint_mismatch():
    report = validate({
        "omega0": 1.0,
        "omega1": 3.0,
        "segments": [
            {"kind": "constant", "duration": 1.0, "omega": 1.0},
            {"kind": "constant", "duration": 1.0, "omega": 2.0},
        ],
    })
    assert not report.ok
    assert any("omega1" in f for f in report.failures)


def test_validate_accepts_consistent_dict():
    report = validate({
        "omega0": 1.0,
        "omega1": 2.0,
        "total_duration": 0.75 * math.pi,
        "segments": [
            {"kind": "constant", "duration": math.pi / 2.0, "omega": 1.0},
            {"kind": "constant", "duration": math.pi / 4.0, "omega": 2.0},
        ],
    })
    assert report.ok
    assert report.failures == ()


def test_validate_accepts_protocol_object():
    report = validate(mixed_protocol())
    assert report.ok
    assert report.omega_start == 1.0


# ---------------- serialization ----------------


def test_dict_round_trip_preserves_every_shape():
    p = mixed_protocol()
    q = protocol_from_dict(protocol_to_dict(p))
    assert q == p


def test_file_round_trip(tmp_path):
    p = build_janszky_adam(1.0, 2.0, 3)
    path = tmp_path / "protocol.json"
    save_protocol(path, p)
    q = load_protocol(path)
    assert q == p
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    assert data["omega0"] == 1.0
    assert data["omega1"] == 2.0
    assert {s["kind"] for s in data["segments"]} == {"constant"}


def test_load_rejects_inconsistent_declaration(tmp_path):
    path = tmp_path / "bad.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({
            "omega1": 5.0,
            "segments": [{"kind": "constant", "duration": 1.0, "omega": 1.0}],
        }, fh)
    with pytest.raises(ProtocolError):
        load_protocol(path)


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("not json at all", encoding="utf-8")
    with pytest.raises(ProtocolError):
        load_protocol(path)


def test_units_key_rescales_frequencies_and_times():
    data = {
        "units": {"frequency_scale": 2.0},
        "segments": [
            {"kind": "constant", "duration": 1.0, "omega": 1.0},
            {"kind": "ramp", "duration": 2.0, "omega_start": 1.0,
             "omega_end": 1.5},
        ],
    }
    p = protocol_from_dict(data)
    assert p.segments[0].shape.omega == 2.0
    assert p.segments[0].duration == 0.5
    assert p.segments[1].shape.omega_end == 3.0
    assert p.total_duration == pytest.approx(1.5)


def test_units_key_rejects_unknown_entries():
    with pytest.raises(ProtocolError):
        protocol_from_dict({
            "units": {"length_scale": 2.0},
            "segments": [{"kind": "constant", "duration": 1.0, "omega": 1.0}],
        })


def test_unknown_segment_kind_is_rejected():
    with pytest.raises(ProtocolError):
        protocol_from_dict({
            "segments": [{"kind": "spline", "duration": 1.0}],
        })
