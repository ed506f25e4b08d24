"""Nonadiabaticity and work bookkeeping along a protocol.

The central quantity is the nonadiabaticity factor Q*(t): the mean energy in
units of the instantaneous adiabatic ground-state energy,
``<H(t)> = omega(t) Q*(t) / 2`` with hbar = 1.  Q* = 1 exactly on an
adiabatic path and Q* > 1 whenever the drive excites the oscillator.  For a
protocol from omega0 to omega1 the work splits into the free-energy change of
the two ground states, ``delta_F = (omega1 - omega0)/2``, and a nonnegative
irreversible remainder ``irr_work = omega1 (Q* - 1)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .dynamics import FundamentalState, CovarianceTriple, covariance
from .protocols import FrequencyProtocol

__all__ = [
    "qstar_from_cov",
    "qstar_from_state",
    "WorkQuantities",
    "work_quantities",
    "ThermoRecord",
    "trajectory_records",
    "write_thermo_csv",
]

_QSTAR_SLACK = 1e-12


def qstar_from_cov(cov: CovarianceTriple, omega: float) -> float:
    """Q* from covariances at the instantaneous frequency ``omega``.

    ``Q* = (<p^2> + omega^2 <q^2>) / omega``, i.e. twice the mean energy over
    omega.  Equals 1 in the instantaneous ground state; always >= 1 for the
    pure Gaussian states produced by frequency driving.
    """
    return (cov.p2 + omega**2 * cov.q2) / omega


def qstar_from_state(state: FundamentalState, omega0: float, omega: float) -> float:
    """Q* straight from the fundamental solutions.

    Same value as ``qstar_from_cov(covariance(state, omega0), omega)``, but in
    a single expression::

        Q* = [omega0^2 (omega^2 X^2 + X'^2) + omega^2 Y^2 + Y'^2]
             / (2 omega0 omega)
    """
    num = (
        omega0**2 * (omega**2 * state.X**2 + state.dX**2)
        + omega**2 * state.Y**2
        + state.dY**2
    )
    return num / (2.0 * omega0 * omega)


class WorkQuantities(NamedTuple):
    total_work: float
    delta_F: float
    irr_work: float


def work_quantities(qstar_final: float, omega0: float, omega1: float) -> WorkQuantities:
    """Split the work done on the oscillator into reversible and irreversible parts.

    Parameters
    ----------
    qstar_final : float
        Terminal nonadiabaticity, measured at ``omega1``.  Values in
        [1 - 1e-12, 1) are clamped to 1 (roundoff from an adiabatic run);
        anything smaller raises ``ValueError`` because Q* >= 1 is an identity
        for this family of states.
    omega0, omega1 : float
        Initial and final frequencies.

    Returns
    -------
    WorkQuantities
        ``total_work = omega1 qstar/2 - omega0/2``,
        ``delta_F = (omega1 - omega0)/2``,
        ``irr_work = omega1 (qstar - 1)/2``.
    """
    if qstar_final < 1.0 - _QSTAR_SLACK:
        raise ValueError(f"Q* = {qstar_final} violates the Q* >= 1 bound")
    q = max(qstar_final, 1.0)
    total = 0.5 * omega1 * q - 0.5 * omega0
    dF = 0.5 * (omega1 - omega0)
    return WorkQuantities(total_work=total, delta_F=dF, irr_work=total - dF)


@dataclass(frozen=True)
class ThermoRecord:
    """Instantaneous thermodynamic snapshot along a protocol."""

    t: float
    omega: float
    qstar: float
    energy: float
    total_work: float
    delta_F: float
    irr_work: float


def trajectory_records(protocol: FrequencyProtocol,
                       states: list[FundamentalState]) -> list[ThermoRecord]:
    """Thermodynamic bookkeeping at every state of a propagated trajectory.

    Each record treats its own time as "final": the frequency is the right
    limit (left limit at tau), the energy is ``omega qstar / 2``, and the
    work entries compare against the initial ground state at ``omega0``.
    """
    omega0 = protocol.omega_start
    records = []
    for s in states:
        w = float(protocol.omega_at(s.t))
        q = qstar_from_state(s, omega0, w)
        wq = work_quantities(q, omega0, w)
        records.append(ThermoRecord(
            t=s.t, omega=w, qstar=q, energy=0.5 * w * q,
            total_work=wq.total_work, delta_F=wq.delta_F, irr_work=wq.irr_work,
        ))
    return records


def write_thermo_csv(path, records: list[ThermoRecord]) -> None:
    """Write ``t, omega, qstar, energy, total_work, delta_F, irr_work`` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,omega,qstar,energy,total_work,delta_F,irr_work\n")
        for r in records:
            row = (r.t, r.omega, r.qstar, r.energy,
                   r.total_work, r.delta_F, r.irr_work)
            fh.write(",".join("%.17g" % v for v in row) + "\n")
