"""Frequency protocols omega(t) for the driven harmonic oscillator.

A protocol is an ordered list of segments that covers [0, tau].  Each segment
carries a duration and a shape (constant, linear ramp, sinusoid, or sampled
grid); sudden frequency jumps are represented implicitly by the value mismatch
between adjacent segments, so no explicit "jump" object exists.  The classical
fundamental solutions are continuous across jumps, which is why nothing beyond
the segment list is needed.

Conventions
-----------
* ``omega_at(t)`` returns the right limit at an interior jump and the left
  limit at ``t = tau``, so the terminal frequency of a protocol is always the
  value held by its final segment.
* All frequencies are angular frequencies in units of the reference frequency
  (typically the initial trap frequency); times are in the inverse unit.

JSON format
-----------
``protocol_to_dict`` / ``protocol_from_dict`` map protocols onto::

    {"omega0": 1.0, "omega1": 2.0, "total_duration": 2.356,
     "segments": [{"kind": "constant", "duration": 1.571, "omega": 1.0},
                  {"kind": "ramp", "duration": 1.0,
                   "omega_start": 1.0, "omega_end": 2.0},
                  {"kind": "sinusoid", "duration": 3.14, "omega_base": 1.0,
                   "amplitude": 0.5, "drive_frequency": 2.0, "phase": 0.0},
                  {"kind": "sampled", "duration": 1.0,
                   "times": [0.0, 0.5, 1.0], "omegas": [1.0, 1.4, 2.0]}]}

``omega0``/``omega1``/``total_duration`` are declarations checked against the
segment list on load.  Frequencies are in units of the reference frequency
unless an optional ``"units": {"frequency_scale": s}`` entry is present, in
which case every frequency is multiplied by ``s`` and every time divided by
``s`` while loading.  Sampled segments interpolate omega (not omega squared)
piecewise linearly between their knots.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ProtocolError

__all__ = [
    "Constant",
    "LinearRamp",
    "Sinusoid",
    "Sampled",
    "Segment",
    "FrequencyProtocol",
    "ValidationReport",
    "build_constant",
    "build_linear_ramp",
    "build_sinusoidal",
    "build_janszky_adam",
    "janszky_adam_switch_times",
    "validate",
    "protocol_to_dict",
    "protocol_from_dict",
    "save_protocol",
    "load_protocol",
]


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ProtocolError(f"{name} must be finite, got {v!r}")


def _sin_range(phi0: float, phi1: float) -> tuple[float, float]:
    """Range of sin(phi) over the phase interval [phi0, phi1]."""
    if phi1 - phi0 >= 2.0 * math.pi:
        return -1.0, 1.0
    lo = min(math.sin(phi0), math.sin(phi1))
    hi = max(math.sin(phi0), math.sin(phi1))
    # interior critical phases at pi/2 + k*pi
    k0 = math.ceil((phi0 - math.pi / 2) / math.pi)
    k1 = math.floor((phi1 - math.pi / 2) / math.pi)
    for k in range(k0, k1 + 1):
        s = 1.0 if k % 2 == 0 else -1.0
        lo = min(lo, s)
        hi = max(hi, s)
    return lo, hi


# ===================== segment shapes =====================


@dataclass(frozen=True)
class Constant:
    """Hold a fixed frequency."""

    omega: float

    def __post_init__(self):
        _require_finite("omega", self.omega)

    def omega_scalar(self, t: float, duration: float) -> float:
        return self.omega

    def omega_array(self, t: np.ndarray, duration: float) -> np.ndarray:
        return np.full(np.shape(t), self.omega, dtype=float)

    def omega_range(self, duration: float) -> tuple[float, float]:
        return self.omega, self.omega


@dataclass(frozen=True)
class LinearRamp:
    """Interpolate the frequency linearly from ``omega_start`` to ``omega_end``."""

    omega_start: float
    omega_end: float

    def __post_init__(self):
        _require_finite("ramp endpoints", self.omega_start, self.omega_end)

    def omega_scalar(self, t: float, duration: float) -> float:
        return self.omega_start + (self.omega_end - self.omega_start) * (t / duration)

    def omega_array(self, t: np.ndarray, duration: float) -> np.ndarray:
        return self.omega_start + (self.omega_end - self.omega_start) * (
            np.asarray(t, dtype=float) / duration
        )

    def omega_range(self, duration: float) -> tuple[float, float]:
        return (
            min(self.omega_start, self.omega_end),
            max(self.omega_start, self.omega_end),
        )


@dataclass(frozen=True)
class Sinusoid:
    """Sinusoidal modulation ``omega_base + amplitude*sin(drive_frequency*t + phase)``.

    ``t`` is local to the segment.  ``drive_frequency`` is an angular
    frequency; the classic parametric drive runs at twice the base frequency.
    """

    omega_base: float
    amplitude: float
    drive_frequency: float
    phase: float = 0.0

    def __post_init__(self):
        _require_finite(
            "sinusoid parameters",
            self.omega_base,
            self.amplitude,
            self.drive_frequency,
            self.phase,
        )
        if self.drive_frequency < 0:
            raise ProtocolError("drive_frequency must be nonnegative")

    def omega_scalar(self, t: float, duration: float) -> float:
        return self.omega_base + self.amplitude * math.sin(
            self.drive_frequency * t + self.phase
        )

    def omega_array(self, t: np.ndarray, duration: float) -> np.ndarray:
        return self.omega_base + self.amplitude * np.sin(
            self.drive_frequency * np.asarray(t, dtype=float) + self.phase
        )

    def omega_range(self, duration: float) -> tuple[float, float]:
        if self.amplitude == 0.0 or self.drive_frequency == 0.0:
            w = self.omega_scalar(0.0, duration)
            return w, w
        lo, hi = _sin_range(self.phase, self.phase + self.drive_frequency * duration)
        vals = (self.omega_base + self.amplitude * lo,
                self.omega_base + self.amplitude * hi)
        return min(vals), max(vals)


@dataclass(frozen=True)
class Sampled:
    """Piecewise-linear frequency through knots ``(times[i], omegas[i])``.

    Knot times are local to the segment: they start at 0 and end at the
    segment duration.
    """

    times: tuple[float, ...]
    omegas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if len(self.times) < 2:
            raise ProtocolError("sampled segment needs at least two knots")
        if len(self.times) != len(self.omegas):
            raise ProtocolError("times and omegas must have equal length")
        _require_finite("sampled knots", *self.times, *self.omegas)
        if self.times[0] != 0.0:
            raise ProtocolError("sampled knot times must start at 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ProtocolError("sampled knot times must be strictly increasing")

    def omega_scalar(self, t: float, duration: float) -> float:
        return float(np.interp(t, self.times, self.omegas))

    def omega_array(self, t: np.ndarray, duration: float) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=float), self.times, self.omegas)

    def omega_range(self, duration: float) -> tuple[float, float]:
        return min(self.omegas), max(self.omegas)


Shape = Union[Constant, LinearRamp, Sinusoid, Sampled]


@dataclass(frozen=True)
class Segment:
    """One piece of a protocol: a shape held for ``duration``."""

    duration: float
    shape: Shape

    def __post_init__(self):
        if not isinstance(self.shape, (Constant, LinearRamp, Sinusoid, Sampled)):
            raise ProtocolError(f"unknown segment shape {type(self.shape).__name__}")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ProtocolError(
                f"segment duration must be positive and finite, got {self.duration!r}"
            )
        if isinstance(self.shape, Sampled):
            end = self.shape.times[-1]
            if abs(end - self.duration) > 1e-12 * max(1.0, self.duration):
                raise ProtocolError(
                    f"sampled knots end at {end}, segment duration is {self.duration}"
                )

    @property
    def is_constant(self) -> bool:
        return isinstance(self.shape, Constant)


# ===================== protocol =====================


@dataclass(frozen=True)
class FrequencyProtocol:
    """An ordered, immutable list of segments covering [0, tau].

    ``total_duration`` and the segment start times are derived with
    compensated summation so that boundary times are reproducible to the
    last bit.  Instances are safe to share across threads or processes.
    """

    segments: tuple[Segment, ...]
    total_duration: float = field(init=False)

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ProtocolError("a protocol needs at least one segment")
        for seg in segments:
            if not isinstance(seg, Segment):
                raise ProtocolError(f"expected Segment, got {type(seg).__name__}")
        object.__setattr__(self, "segments", segments)
        durations = [seg.duration for seg in segments]
        starts = tuple(math.fsum(durations[:i]) for i in range(len(durations)))
        tau = math.fsum(durations)
        object.__setattr__(self, "_starts", starts)
        object.__setattr__(self, "total_duration", tau)
        for i, seg in enumerate(segments):
            lo, _ = seg.shape.omega_range(seg.duration)
            if lo <= 0.0:
                raise ProtocolError(
                    f"segment {i} reaches nonpositive frequency (min {lo})"
                )

    # -- geometry ------------------------------------------------------

    @property
    def segment_starts(self) -> tuple[float, ...]:
        """Start time of each segment (compensated prefix sums)."""
        return self._starts

    def segment_index_at(self, t: float) -> int:
        """Index of the segment owning time ``t`` (right limit; ``tau`` maps to the last)."""
        if not (0.0 <= t <= self.total_duration):
            raise ValueError(
                f"t={t} outside protocol window [0, {self.total_duration}]"
            )
        i = int(np.searchsorted(self._starts, t, side="right")) - 1
        return min(max(i, 0), len(self.segments) - 1)

    # -- evaluation ----------------------------------------------------

    def omega_at(self, t):
        """Frequency at time ``t`` (scalar or array).

        At an interior jump the right limit is returned; at ``t = tau`` the
        left limit (the final segment's value).  Times outside [0, tau]
        raise ``ValueError``.
        """
        arr = np.asarray(t, dtype=float)
        if arr.ndim == 0:
            i = self.segment_index_at(float(arr))
            seg = self.segments[i]
            local = min(float(arr) - self._starts[i], seg.duration)
            return float(seg.shape.omega_scalar(max(local, 0.0), seg.duration))
        if arr.size and (arr.min() < 0.0 or arr.max() > self.total_duration):
            raise ValueError("times outside protocol window [0, tau]")
        idx = np.searchsorted(self._starts, arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        out = np.empty_like(arr)
        for i in np.unique(idx):
            seg = self.segments[i]
            mask = idx == i
            local = np.clip(arr[mask] - self._starts[i], 0.0, seg.duration)
            out[mask] = seg.shape.omega_array(local, seg.duration)
        return out

    @property
    def omega_start(self) -> float:
        """Frequency at t=0 (right limit)."""
        seg = self.segments[0]
        return float(seg.shape.omega_scalar(0.0, seg.duration))

    @property
    def omega_end(self) -> float:
        """Frequency at t=tau (left limit)."""
        seg = self.segments[-1]
        return float(seg.shape.omega_scalar(seg.duration, seg.duration))


# ===================== builders =====================


def build_constant(omega: float, duration: float) -> FrequencyProtocol:
    """A single constant hold."""
    return FrequencyProtocol((Segment(duration, Constant(omega)),))


def build_linear_ramp(omega0: float, omega1: float, tau: float) -> FrequencyProtocol:
    """A single linear ramp from ``omega0`` to ``omega1`` over ``tau``."""
    if omega0 <= 0.0 or omega1 <= 0.0:
        raise ProtocolError("ramp frequencies must be positive")
    if tau <= 0.0:
        raise ProtocolError("ramp duration must be positive")
    return FrequencyProtocol((Segment(tau, LinearRamp(omega0, omega1)),))


def build_sinusoidal(
    omega0: float, omega1: float, n_periods: float
) -> FrequencyProtocol:
    """Parametric drive ``omega(t) = omega0 + (omega1-omega0) sin(2 omega0 t)/2``.

    The drive runs at twice the base frequency (parametric resonance of the
    oscillator at ``omega0``); one drive period lasts ``pi/omega0``.
    ``n_periods`` may be fractional, which is useful for matching the drive
    window to another protocol's duration.
    """
    if omega0 <= 0.0:
        raise ProtocolError("omega0 must be positive")
    if n_periods <= 0.0:
        raise ProtocolError("n_periods must be positive")
    amplitude = 0.5 * (omega1 - omega0)
    if omega0 - abs(amplitude) <= 0.0:
        raise ProtocolError(
            f"drive reaches nonpositive frequency (min {omega0 - abs(amplitude)})"
        )
    duration = n_periods * math.pi / omega0
    shape = Sinusoid(omega0, amplitude, 2.0 * omega0, 0.0)
    return FrequencyProtocol((Segment(duration, shape),))


def build_janszky_adam(omega0: float, omega1: float, n: int) -> FrequencyProtocol:
    """Bang-bang squeezing protocol with ``n`` sudden jumps between two frequencies.

    Starting from a hold at ``omega0``, the frequency jumps between ``omega0``
    and ``omega1`` exactly ``n`` times, with each hold lasting a quarter
    period of its own frequency (``pi/(2*omega)``), the spacing that aligns
    the squeezing ellipse for the next jump.  Each jump multiplies the
    variance ratio by ``omega1/omega0``, so the terminal squeezing obeys
    ``exp(2 r) = (omega1/omega0)**n`` measured at the final frequency.

    The protocol ends with the quarter-period hold that follows the last
    jump: at ``omega1`` when ``n`` is odd, back at ``omega0`` when ``n`` is
    even (the jump sequence alternates, so an even count necessarily lands
    on the start frequency).

    Parameters
    ----------
    omega0, omega1 : float
        The two frequency levels (both positive).
    n : int
        Number of jumps, at least 1.

    Returns
    -------
    FrequencyProtocol
        ``n + 1`` constant segments with quarter-period durations.
    """
    if omega0 <= 0.0 or omega1 <= 0.0:
        raise ProtocolError("frequencies must be positive")
    if int(n) != n or n < 1:
        raise ProtocolError(f"jump count must be a positive integer, got {n!r}")
    segs = []
    for k in range(int(n) + 1):
        w = omega0 if k % 2 == 0 else omega1
        segs.append(Segment(math.pi / (2.0 * w), Constant(w)))
    return FrequencyProtocol(tuple(segs))


def janszky_adam_switch_times(omega0: float, omega1: float, n: int) -> tuple[float, ...]:
    """Jump times of ``build_janszky_adam(omega0, omega1, n)``."""
    protocol = build_janszky_adam(omega0, omega1, n)
    return protocol.segment_starts[1:]


# ===================== validation and serialization =====================


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of ``validate``: ``ok`` plus human-readable failure strings."""

    ok: bool
    failures: tuple[str, ...]
    omega_start: float | None
    omega_end: float | None
    total_duration: float | None


_KIND_TO_SHAPE = {"constant": Constant, "ramp": LinearRamp,
                  "sinusoid": Sinusoid, "sampled": Sampled}


def _shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Constant):
        return {"kind": "constant", "omega": shape.omega}
    if isinstance(shape, LinearRamp):
        return {"kind": "ramp", "omega_start": shape.omega_start,
                "omega_end": shape.omega_end}
    if isinstance(shape, Sinusoid):
        return {"kind": "sinusoid", "omega_base": shape.omega_base,
                "amplitude": shape.amplitude,
                "drive_frequency": shape.drive_frequency, "phase": shape.phase}
    if isinstance(shape, Sampled):
        return {"kind": "sampled", "times": list(shape.times),
                "omegas": list(shape.omegas)}
    raise ProtocolError(f"unknown shape {type(shape).__name__}")


def _shape_from_dict(d: dict, fscale: float) -> Shape:
    kind = d.get("kind")
    if kind == "constant":
        return Constant(float(d["omega"]) * fscale)
    if kind == "ramp":
        return LinearRamp(float(d["omega_start"]) * fscale,
                          float(d["omega_end"]) * fscale)
    if kind == "sinusoid":
        return Sinusoid(float(d["omega_base"]) * fscale,
                        float(d["amplitude"]) * fscale,
                        float(d["drive_frequency"]) * fscale,
                        float(d.get("phase", 0.0)))
    if kind == "sampled":
        return Sampled(tuple(float(t) / fscale for t in d["times"]),
                       tuple(float(w) * fscale for w in d["omegas"]))
    raise ProtocolError(f"unknown segment kind {kind!r}")


def protocol_to_dict(protocol: FrequencyProtocol) -> dict:
    """JSON-ready dict in the documented protocol format."""
    return {
        "omega0": protocol.omega_start,
        "omega1": protocol.omega_end,
        "total_duration": protocol.total_duration,
        "segments": [
            {"duration": seg.duration, **_shape_to_dict(seg.shape)}
            for seg in protocol.segments
        ],
    }


def _units_scale(data: dict) -> float:
    units = data.get("units")
    if units is None:
        return 1.0
    if not isinstance(units, dict) or set(units) - {"frequency_scale"}:
        raise ProtocolError('the "units" entry only supports {"frequency_scale": s}')
    s = float(units["frequency_scale"])
    if not (math.isfinite(s) and s > 0.0):
        raise ProtocolError("frequency_scale must be positive and finite")
    return s


def validate(source: FrequencyProtocol | dict) -> ValidationReport:
    """Check positivity, duration consistency and declared endpoint frequencies.

    Accepts either a constructed protocol (always consistent by construction,
    re-checked for defence in depth) or a raw protocol dict, where declared
    ``omega0``/``omega1``/``total_duration`` entries are compared against the
    segment list and failures are collected instead of raised.
    """
    failures: list[str] = []
    if isinstance(source, FrequencyProtocol):
        protocol = source
        declared = {}
    else:
        declared = source
        try:
            fscale = _units_scale(declared)
        except ProtocolError as exc:
            return ValidationReport(False, (str(exc),), None, None, None)
        seg_dicts = declared.get("segments")
        if not isinstance(seg_dicts, list) or not seg_dicts:
            return ValidationReport(
                False, ("protocol needs a non-empty segments list",), None, None, None
            )
        segments = []
        for i, sd in enumerate(seg_dicts):
            try:
                duration = float(sd["duration"]) / fscale
                shape = _shape_from_dict(sd, fscale)
                seg = Segment(duration, shape)
            except (ProtocolError, KeyError, TypeError, ValueError) as exc:
                failures.append(f"segment {i}: {exc}")
                continue
            lo, _ = shape.omega_range(duration)
            if lo <= 0.0:
                failures.append(
                    f"segment {i}: reaches nonpositive frequency (min {lo})"
                )
                continue
            segments.append(seg)
        if failures:
            return ValidationReport(False, tuple(failures), None, None, None)
        protocol = FrequencyProtocol(tuple(segments))

    for i, seg in enumerate(protocol.segments):
        lo, _ = seg.shape.omega_range(seg.duration)
        if lo <= 0.0:
            failures.append(f"segment {i}: reaches nonpositive frequency (min {lo})")

    tol = 1e-9
    if "total_duration" in declared:
        declared_tau = float(declared["total_duration"])
        if not math.isclose(
            declared_tau, protocol.total_duration, rel_tol=tol, abs_tol=tol
        ):
            failures.append(
                f"declared total_duration {declared_tau} != "
                f"segment sum {protocol.total_duration}"
            )
    for key, actual in (("omega0", protocol.omega_start),
                        ("omega1", protocol.omega_end)):
        if key in declared:
            declared_w = float(declared[key])
            if not math.isclose(declared_w, actual, rel_tol=tol, abs_tol=tol):
                failures.append(f"declared {key} {declared_w} != actual {actual}")

    return ValidationReport(
        ok=not failures,
        failures=tuple(failures),
        omega_start=protocol.omega_start,
        omega_end=protocol.omega_end,
        total_duration=protocol.total_duration,
    )


def protocol_from_dict(data: dict) -> FrequencyProtocol:
    """Build a protocol from the documented JSON structure.

    Raises ``ProtocolError`` with the collected validation failures if the
    dict is inconsistent or describes a nonpositive frequency.
    """
    report = validate(data)
    if not report.ok:
        raise ProtocolError("; ".join(report.failures))
    fscale = _units_scale(data)
    segments = tuple(
        Segment(float(sd["duration"]) / fscale, _shape_from_dict(sd, fscale))
        for sd in data["segments"]
    )
    return FrequencyProtocol(segments)


def save_protocol(path, protocol: FrequencyProtocol) -> None:
    """Write a protocol to ``path`` as JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(protocol_to_dict(protocol), fh, indent=2)
        fh.write("\n")


def load_protocol(path) -> FrequencyProtocol:
    """Read a protocol JSON file written by ``save_protocol`` (or by hand)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProtocolError("protocol file must contain a JSON object")
    return protocol_from_dict(data)
