"""Uniform stepping interface over the three engines.

Each engine advances by one recording interval at a time, produces a
Snapshot, and round-trips through a dict of numpy arrays for checkpoints.
"""

from __future__ import annotations

import numpy as np

from . import fock, freefermion as ff, mps
from .model import ModelParams, hamiltonian
from .observables import Snapshot


class FreeFermionEngine:
    name = "free-fermion"

    def __init__(self, params: ModelParams, C0: ff.CorrelationMatrix, interval: float, records: int = 0):
        self.params = params
        self.C0 = C0
        self.interval = interval
        self.records = records
        self._evolver = ff.FreeEvolver(params)

    def step(self):
        self.records += 1

    def snapshot(self) -> Snapshot:
        # always propagate from t = 0 so no error accumulates between records
        C = self._evolver.evolve(self.C0, self.records * self.interval)
        return Snapshot(ff.density_from_correlation(C), ff.half_current_from_correlation(C, self.params.J))

    def to_arrays(self) -> dict:
        return {"ff_C0": self.C0.C, "ff_records": np.array(self.records)}

    @classmethod
    def from_arrays(cls, params, interval, arrays):
        return cls(params, ff.CorrelationMatrix(np.array(arrays["ff_C0"])), interval, int(arrays["ff_records"]))


class ExactEngine:
    name = "exact"

    def __init__(self, params: ModelParams, state: fock.FockVector, interval: float):
        self.params = params
        self.state = state
        self.interval = interval
        self.H = hamiltonian(params, state.basis)
        self._prop = fock.ExactPropagator(self.H) if len(state.basis) <= fock.SPECTRAL_DIM else None

    def step(self):
        if self._prop is not None:
            self.state = self._prop.evolve(self.state, self.interval)
        else:
            self.state = fock.evolve(self.state, self.H, self.interval)

    def snapshot(self) -> Snapshot:
        return Snapshot(fock.density(self.state), fock.half_current(self.state, self.params.J))

    def to_arrays(self) -> dict:
        return {"ex_N": np.array(self.state.basis.N), "ex_amplitudes": self.state.amplitudes}

    @classmethod
    def from_arrays(cls, params, interval, arrays):
        basis = fock.enumerate_basis(params.L, int(arrays["ex_N"]))
        return cls(params, fock.FockVector(basis, np.array(arrays["ex_amplitudes"])), interval)


class MpsEngine:
    name = "mps"

    def __init__(
        self,
        params: ModelParams,
        state: mps.MpsState,
        schedule: mps.TebdSchedule,
        steps: int,
        alarm_threshold: float = 1e-6,
        alarm_steps: int = 0,
        max_step_discarded: float = 0.0,
    ):
        self.params = params
        self.state = state
        self.schedule = schedule
        self.steps = steps
        self.alarm_threshold = alarm_threshold
        self.alarm_steps = alarm_steps
        self.max_step_discarded = max_step_discarded

    def step(self):
        for _ in range(self.steps):
            mps.tebd_step(self.state, self.params, self.schedule)
            d = self.state.step_discarded
            self.max_step_discarded = max(self.max_step_discarded, d)
            if d > self.alarm_threshold:
                self.alarm_steps += 1

    @property
    def cap_reached(self) -> bool:
        return max(self.state.bond_dims) >= self.state.chi_max

    def snapshot(self) -> Snapshot:
        m = mps.measure(self.state)
        return Snapshot(
            m.density,
            m.half_current(self.params.J),
            float(m.entropies.max()) if m.entropies.size else 0.0,
            self.state.discarded_weight,
        )

    def to_arrays(self) -> dict:
        out = mps.to_arrays(self.state)
        out["mps_alarm_steps"] = np.array(self.alarm_steps)
        out["mps_max_step_discarded"] = np.array(self.max_step_discarded)
        return out

    @classmethod
    def from_arrays(cls, params, schedule, steps, alarm_threshold, arrays):
        return cls(
            params,
            mps.from_arrays(arrays),
            schedule,
            steps,
            alarm_threshold,
            int(arrays["mps_alarm_steps"]),
            float(arrays["mps_max_step_discarded"]),
        )
