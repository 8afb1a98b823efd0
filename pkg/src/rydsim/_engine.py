"""Fixed-step 4th-order propagation kernels.

The schedule is packed into flat arrays once; the inner loops are jitted.
Per-segment step sizes follow dt = 1 / (step_divisor * f_max) with f_max the
largest plain frequency (Rabi or detuning, in 1/us) active on the segment.
Segments are cut at every envelope-support edge, shift-window edge and
detuning switch, so the integrand is smooth inside each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f
        return wrap

from . import pulses as P
from ._spaces import ALL_ENSEMBLES

TWO_PI = 2.0 * math.pi

KIND_GAUSS = 0
KIND_RECT = 1
SHIFT_CONST = 0
SHIFT_SIGN = 1
SHIFT_CHIRP = 2


class IntegrationError(RuntimeError):
    """Raised when the propagated state drifts beyond tolerance."""


# Diagnostic high-water mark of the norm drift across runs in this process.
# Purely observational (tests read it); propagation itself never consults it.
_drift_high_water = 0.0


def reset_drift_monitor() -> None:
    global _drift_high_water
    _drift_high_water = 0.0


def max_recorded_drift() -> float:
    return _drift_high_water


@dataclass
class PackedSchedule:
    # drive terms
    t_kind: np.ndarray
    t_amp: np.ndarray
    t_c: np.ndarray       # gaussian center / rect start
    t_w: np.ndarray       # gaussian tau / rect duration
    t_phase: np.ndarray   # complex carrier factor e^{i phi}
    t_lo: np.ndarray
    t_hi: np.ndarray
    t_cid: np.ndarray
    # coupling structures, CSR-like concatenation
    c_ptr: np.ndarray
    c_row: np.ndarray
    c_col: np.ndarray
    c_val: np.ndarray
    # level shifts
    s_kind: np.ndarray
    s_d0: np.ndarray
    s_t0: np.ndarray
    s_rate: np.ndarray
    s_lo: np.ndarray
    s_hi: np.ndarray
    s_sid: np.ndarray
    s_diag: np.ndarray    # (n_diag_ids, dim)
    # window
    t_start: float
    t_end: float

    def boundaries(self) -> np.ndarray:
        pts = [self.t_start, self.t_end]
        pts.extend(self.t_lo)
        pts.extend(self.t_hi)
        pts.extend(self.s_lo[np.isfinite(self.s_lo)])
        pts.extend(self.s_hi[np.isfinite(self.s_hi)])
        for k in range(self.s_kind.size):
            if self.s_kind[k] == SHIFT_SIGN:
                pts.append(self.s_t0[k])
        pts = np.asarray(pts, dtype=np.float64)
        pts = pts[(pts >= self.t_start) & (pts <= self.t_end)]
        return np.unique(pts)

    def local_fmax(self, lo: float, hi: float) -> float:
        """Largest plain frequency (1/us) active anywhere on [lo, hi]."""
        f = 0.0
        for i in range(self.t_kind.size):
            if self.t_hi[i] <= lo or self.t_lo[i] >= hi:
                continue
            f = max(f, self.t_amp[i] / TWO_PI)
        for k in range(self.s_kind.size):
            if self.s_hi[k] <= lo or self.s_lo[k] >= hi:
                continue
            a, b = max(lo, self.s_lo[k]), min(hi, self.s_hi[k])
            if self.s_kind[k] == SHIFT_CHIRP:
                d = max(abs(self.s_rate[k] * (a - self.s_t0[k])),
                        abs(self.s_rate[k] * (b - self.s_t0[k])))
            else:
                d = abs(self.s_d0[k])
            f = max(f, d / TWO_PI)
        return f


def pack_schedule(schedule: P.PulseSchedule, space) -> PackedSchedule:
    """Bind a schedule to a state-space backend."""
    couplings: dict[tuple[tuple[str, str], int], int] = {}
    ptr = [0]
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    def coupling_id(transition, target):
        key = (transition, target)
        if key not in couplings:
            r, c, v = space.coupling(transition[0], transition[1], target)
            rows.append(r)
            cols.append(c)
            vals.append(v)
            ptr.append(ptr[-1] + r.size)
            couplings[key] = len(couplings)
        return couplings[key]

    n_t = len(schedule.terms)
    t_kind = np.zeros(n_t, dtype=np.int64)
    t_amp = np.zeros(n_t)
    t_c = np.zeros(n_t)
    t_w = np.zeros(n_t)
    t_phase = np.zeros(n_t, dtype=np.complex128)
    t_lo = np.zeros(n_t)
    t_hi = np.zeros(n_t)
    t_cid = np.zeros(n_t, dtype=np.int64)
    for i, term in enumerate(schedule.terms):
        env = term.envelope
        if isinstance(env, P.GaussianEnvelope):
            t_kind[i] = KIND_GAUSS
            t_amp[i] = env.peak
            t_c[i] = env.center
            t_w[i] = env.tau
        else:
            t_kind[i] = KIND_RECT
            t_amp[i] = env.amplitude
            t_c[i] = env.start
            t_w[i] = env.duration
        t_phase[i] = np.exp(1j * env.carrier_phase)
        t_lo[i], t_hi[i] = env.support
        t_cid[i] = coupling_id(term.transition, term.target)

    diag_ids: dict[tuple[str, int], int] = {}
    diag_vecs: list[np.ndarray] = []

    def diag_id(level, target):
        key = (level, target)
        if key not in diag_ids:
            diag_vecs.append(space.level_counts(level, target))
            diag_ids[key] = len(diag_ids)
        return diag_ids[key]

    n_s = len(schedule.shifts)
    s_kind = np.zeros(n_s, dtype=np.int64)
    s_d0 = np.zeros(n_s)
    s_t0 = np.zeros(n_s)
    s_rate = np.zeros(n_s)
    s_lo = np.zeros(n_s)
    s_hi = np.zeros(n_s)
    s_sid = np.zeros(n_s, dtype=np.int64)
    for k, sh in enumerate(schedule.shifts):
        pr = sh.profile
        if pr.kind == P.CONSTANT:
            s_kind[k] = SHIFT_CONST
            s_d0[k] = pr.delta0
        elif pr.kind == P.SIGN_SWITCH:
            s_kind[k] = SHIFT_SIGN
            s_d0[k] = pr.delta0
            s_t0[k] = pr.switch_time
        else:
            s_kind[k] = SHIFT_CHIRP
            s_rate[k] = pr.rate
            s_t0[k] = pr.origin
        s_lo[k] = max(sh.window[0], schedule.t_start)
        s_hi[k] = min(sh.window[1], schedule.t_end)
        s_sid[k] = diag_id(sh.level, sh.target)

    dim = space.dimension
    s_diag = (np.vstack(diag_vecs) if diag_vecs
              else np.zeros((1, dim), dtype=np.float64))

    return PackedSchedule(
        t_kind=t_kind, t_amp=t_amp, t_c=t_c, t_w=t_w, t_phase=t_phase,
        t_lo=t_lo, t_hi=t_hi, t_cid=t_cid,
        c_ptr=np.asarray(ptr, dtype=np.int64),
        c_row=(np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)),
        c_col=(np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)),
        c_val=(np.concatenate(vals) if vals else np.zeros(0)),
        s_kind=s_kind, s_d0=s_d0, s_t0=s_t0, s_rate=s_rate,
        s_lo=s_lo, s_hi=s_hi, s_sid=s_sid, s_diag=s_diag,
        t_start=schedule.t_start, t_end=schedule.t_end)


# -- jitted kernels ----------------------------------------------------------

@njit(cache=True)
def _hpsi(t, t_ref, y, out,
          t_kind, t_amp, t_c, t_w, t_phase, t_lo, t_hi, t_cid,
          c_ptr, c_row, c_col, c_val,
          s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag):
    """out = -i H(t) y.

    Activity windows are tested against t_ref (the enclosing segment's
    midpoint): segments never straddle a window edge, and deciding
    membership once per segment keeps boundary stages from sampling the
    neighbouring segment's Hamiltonian.
    """
    for k in range(out.size):
        out[k] = 0.0
    for i in range(t_kind.size):
        if t_ref < t_lo[i] or t_ref > t_hi[i]:
            continue
        if t_kind[i] == 0:
            u = (t - t_c[i]) / t_w[i]
            env = t_amp[i] * math.exp(-0.5 * u * u)
        else:
            env = t_amp[i]
        if env == 0.0:
            continue
        amp = 0.5 * env * t_phase[i]
        ampc = amp.conjugate()
        cid = t_cid[i]
        for e in range(c_ptr[cid], c_ptr[cid + 1]):
            r = c_row[e]
            c = c_col[e]
            v = c_val[e]
            out[r] += -1j * amp * v * y[c]
            out[c] += -1j * ampc * v * y[r]
    for s in range(s_kind.size):
        if t_ref < s_lo[s] or t_ref > s_hi[s]:
            continue
        if s_kind[s] == 0:
            d = s_d0[s]
        elif s_kind[s] == 1:
            d = s_d0[s] if t_ref < s_t0[s] else -s_d0[s]
        else:
            d = s_rate[s] * (t - s_t0[s])
        if d == 0.0:
            continue
        row = s_sid[s]
        for k in range(y.size):
            n = s_diag[row, k]
            if n != 0.0:
                out[k] += 1j * d * n * y[k]


@njit(cache=True)
def _rk4_state(y, t0, dt, nsteps,
               t_kind, t_amp, t_c, t_w, t_phase, t_lo, t_hi, t_cid,
               c_ptr, c_row, c_col, c_val,
               s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag):
    dim = y.size
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty(dim, dtype=np.complex128)
    k3 = np.empty(dim, dtype=np.complex128)
    k4 = np.empty(dim, dtype=np.complex128)
    tmp = np.empty(dim, dtype=np.complex128)
    t_ref = t0 + 0.5 * nsteps * dt
    for s in range(nsteps):
        t = t0 + s * dt
        _hpsi(t, t_ref, y, k1, t_kind, t_amp, t_c, t_w, t_phase, t_lo, t_hi,
              t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag)
        for k in range(dim):
            tmp[k] = y[k] + 0.5 * dt * k1[k]
        _hpsi(t + 0.5 * dt, t_ref, tmp, k2, t_kind, t_amp, t_c, t_w, t_phase,
              t_lo, t_hi, t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag)
        for k in range(dim):
            tmp[k] = y[k] + 0.5 * dt * k2[k]
        _hpsi(t + 0.5 * dt, t_ref, tmp, k3, t_kind, t_amp, t_c, t_w, t_phase,
              t_lo, t_hi, t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag)
        for k in range(dim):
            tmp[k] = y[k] + dt * k3[k]
        _hpsi(t + dt, t_ref, tmp, k4, t_kind, t_amp, t_c, t_w, t_phase,
              t_lo, t_hi, t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag)
        for k in range(dim):
            y[k] += (dt / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])


@njit(cache=True)
def _lrho(t, t_ref, rho, out,
          t_kind, t_amp, t_c, t_w, t_phase, t_lo, t_hi, t_cid,
          c_ptr, c_row, c_col, c_val,
          s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag,
          gamma_e, gamma_r, raise_map, n_e, n_r):
    """out = -i [H(t), rho] + dissipator(rho)."""
    dim = rho.shape[0]
    for a in range(dim):
        for b in range(dim):
            out[a, b] = 0.0
    for i in range(t_kind.size):
        if t_ref < t_lo[i] or t_ref > t_hi[i]:
            continue
        if t_kind[i] == 0:
            u = (t - t_c[i]) / t_w[i]
            env = t_amp[i] * math.exp(-0.5 * u * u)
        else:
            env = t_amp[i]
        if env == 0.0:
            continue
        amp = 0.5 * env * t_phase[i]
        ampc = amp.conjugate()
        cid = t_cid[i]
        for e in range(c_ptr[cid], c_ptr[cid + 1]):
            r = c_row[e]
            c = c_col[e]
            v = c_val[e]
            for m in range(dim):
                out[r, m] += -1j * amp * v * rho[c, m]
                out[c, m] += -1j * ampc * v * rho[r, m]
                out[m, c] += 1j * amp * v * rho[m, r]
                out[m, r] += 1j * ampc * v * rho[m, c]
    for s in range(s_kind.size):
        if t_ref < s_lo[s] or t_ref > s_hi[s]:
            continue
        if s_kind[s] == 0:
            d = s_d0[s]
        elif s_kind[s] == 1:
            d = s_d0[s] if t_ref < s_t0[s] else -s_d0[s]
        else:
            d = s_rate[s] * (t - s_t0[s])
        if d == 0.0:
            continue
        row = s_sid[s]
        for k in range(dim):
            n = s_diag[row, k]
            if n != 0.0:
                for m in range(dim):
                    out[k, m] += 1j * d * n * rho[k, m]
                    out[m, k] += -1j * d * n * rho[m, k]
    n_atoms = raise_map.shape[0]
    for a in range(dim):
        for b in range(dim):
            acc = 0.0 + 0.0j
            for j in range(n_atoms):
                ra = raise_map[j, a]
                rb = raise_map[j, b]
                if ra >= 0 and rb >= 0:
                    acc += rho[ra, rb]
            out[a, b] += (gamma_e * acc
                          - 0.5 * gamma_e * (n_e[a] + n_e[b]) * rho[a, b]
                          - 0.5 * gamma_r * (n_r[a] + n_r[b]) * rho[a, b])


@njit(cache=True)
def _rk4_density(rho, t0, dt, nsteps,
                 t_kind, t_amp, t_c, t_w, t_phase, t_lo, t_hi, t_cid,
                 c_ptr, c_row, c_col, c_val,
                 s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag,
                 gamma_e, gamma_r, raise_map, n_e, n_r):
    dim = rho.shape[0]
    k1 = np.empty((dim, dim), dtype=np.complex128)
    k2 = np.empty((dim, dim), dtype=np.complex128)
    k3 = np.empty((dim, dim), dtype=np.complex128)
    k4 = np.empty((dim, dim), dtype=np.complex128)
    tmp = np.empty((dim, dim), dtype=np.complex128)
    t_ref = t0 + 0.5 * nsteps * dt
    for s in range(nsteps):
        t = t0 + s * dt
        _lrho(t, t_ref, rho, k1, t_kind, t_amp, t_c, t_w, t_phase, t_lo, t_hi, t_cid,
              c_ptr, c_row, c_col, c_val, s_kind, s_d0, s_t0, s_rate,
              s_lo, s_hi, s_sid, s_diag, gamma_e, gamma_r, raise_map, n_e, n_r)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + 0.5 * dt * k1[a, b]
        _lrho(t + 0.5 * dt, t_ref, tmp, k2, t_kind, t_amp, t_c, t_w, t_phase,
              t_lo, t_hi, t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag,
              gamma_e, gamma_r, raise_map, n_e, n_r)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + 0.5 * dt * k2[a, b]
        _lrho(t + 0.5 * dt, t_ref, tmp, k3, t_kind, t_amp, t_c, t_w, t_phase,
              t_lo, t_hi, t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag,
              gamma_e, gamma_r, raise_map, n_e, n_r)
        for a in range(dim):
            for b in range(dim):
                tmp[a, b] = rho[a, b] + dt * k3[a, b]
        _lrho(t + dt, t_ref, tmp, k4, t_kind, t_amp, t_c, t_w, t_phase,
              t_lo, t_hi, t_cid, c_ptr, c_row, c_col, c_val,
              s_kind, s_d0, s_t0, s_rate, s_lo, s_hi, s_sid, s_diag,
              gamma_e, gamma_r, raise_map, n_e, n_r)
        for a in range(dim):
            for b in range(dim):
                rho[a, b] += (dt / 6.0) * (k1[a, b] + 2.0 * k2[a, b]
                                           + 2.0 * k3[a, b] + k4[a, b])


# -- drivers -----------------------------------------------------------------

def _segment_steps(lo: float, hi: float, packed: PackedSchedule,
                   step_divisor: int) -> tuple[int, float]:
    length = hi - lo
    fmax = packed.local_fmax(lo, hi)
    if fmax <= 0.0:
        return 0, length  # free evolution in this frame: state unchanged
    dt_target = 1.0 / (step_divisor * fmax)
    n = max(1, int(math.ceil(length / dt_target - 1e-12)))
    return n, length / n


def _piecewise(packed: PackedSchedule, sample_times: np.ndarray) -> list[tuple[float, float]]:
    bounds = packed.boundaries()
    cuts = np.unique(np.concatenate([bounds, sample_times]))
    return [(cuts[i], cuts[i + 1]) for i in range(cuts.size - 1)]


class StatePropagator:
    """Schrodinger propagation of one schedule over one state space."""

    def __init__(self, space, schedule: P.PulseSchedule, step_divisor: int = 200):
        if step_divisor < 1:
            raise ValueError("step_divisor must be >= 1")
        self.space = space
        self.schedule = schedule
        self.step_divisor = int(step_divisor)
        self.packed = pack_schedule(schedule, space)

    def run(self, psi0: np.ndarray, sample_times: np.ndarray):
        """Propagate and sample; returns (samples, max_norm_drift)."""
        pk = self.packed
        times = np.asarray(sample_times, dtype=np.float64)
        if times[0] < pk.t_start - 1e-12 or times[-1] > pk.t_end + 1e-12:
            raise ValueError("sample times outside the schedule window")
        y = np.array(psi0, dtype=np.complex128, copy=True)
        n0 = np.linalg.norm(y)

        samples = np.empty((times.size, y.size), dtype=np.complex128)
        drift = 0.0
        pieces = _piecewise(pk, times)
        next_sample = 0
        t_cur = pk.t_start
        args = (pk.t_kind, pk.t_amp, pk.t_c, pk.t_w, pk.t_phase,
                pk.t_lo, pk.t_hi, pk.t_cid,
                pk.c_ptr, pk.c_row, pk.c_col, pk.c_val,
                pk.s_kind, pk.s_d0, pk.s_t0, pk.s_rate,
                pk.s_lo, pk.s_hi, pk.s_sid, pk.s_diag)
        while next_sample < times.size and times[next_sample] <= t_cur + 1e-15:
            samples[next_sample] = y
            next_sample += 1
        for lo, hi in pieces:
            nsteps, dt = _segment_steps(lo, hi, pk, self.step_divisor)
            if nsteps > 0:
                _rk4_state(y, lo, dt, nsteps, *args)
            t_cur = hi
            while next_sample < times.size and times[next_sample] <= t_cur + 1e-12:
                samples[next_sample] = y
                drift = max(drift, abs(np.linalg.norm(y) - n0))
                next_sample += 1
        while next_sample < times.size:
            samples[next_sample] = y
            next_sample += 1
        drift = max(drift, abs(np.linalg.norm(y) - n0))
        global _drift_high_water
        _drift_high_water = max(_drift_high_water, drift)
        if drift > 1e-6:
            raise IntegrationError(
                f"norm drift {drift:.3e} exceeds 1e-6; rerun with a larger "
                f"step_divisor (current {self.step_divisor})")
        return samples, float(drift)


def decay_structure(basis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-atom raise maps (0 -> e) plus e and Rydberg occupation counts.

    The closed channel recycles the intermediate level 'e' into the first
    ground level; every Rydberg level decays out of the modeled space.
    """
    scheme = basis.scheme
    ground0 = scheme.ground_levels[0]
    has_e = "e" in scheme.levels
    n_atoms = basis.n_total
    dim = basis.dimension
    raise_map = -np.ones((max(n_atoms, 1), dim), dtype=np.int64)
    n_e = np.zeros(dim)
    n_r = np.zeros(dim)
    for idx, config in enumerate(basis.configurations):
        n_r[idx] = basis.rydberg_count(config)
        if has_e:
            n_e[idx] = sum(1 for lab in config if lab == "e")
            for j in range(n_atoms):
                if config[j] == ground0:
                    raised = config[:j] + ("e",) + config[j + 1:]
                    tgt = basis.index.get(raised)
                    if tgt is not None:
                        raise_map[j, idx] = tgt
    return raise_map, n_e, n_r


class DensityPropagator:
    """Master-equation propagation over the full configuration basis."""

    def __init__(self, space, schedule: P.PulseSchedule, gamma_e: float,
                 gamma_r: float, step_divisor: int = 200):
        self.space = space
        self.packed = pack_schedule(schedule, space)
        self.gamma_e = float(gamma_e)
        self.gamma_r = float(gamma_r)
        self.step_divisor = int(step_divisor)
        self.raise_map, self.n_e, self.n_r = decay_structure(space.basis)

    def run(self, rho0: np.ndarray, sample_times: np.ndarray):
        pk = self.packed
        times = np.asarray(sample_times, dtype=np.float64)
        rho = np.array(rho0, dtype=np.complex128, copy=True)
        dim = rho.shape[0]
        samples = np.empty((times.size, dim, dim), dtype=np.complex128)
        herm_defect = 0.0
        args = (pk.t_kind, pk.t_amp, pk.t_c, pk.t_w, pk.t_phase,
                pk.t_lo, pk.t_hi, pk.t_cid,
                pk.c_ptr, pk.c_row, pk.c_col, pk.c_val,
                pk.s_kind, pk.s_d0, pk.s_t0, pk.s_rate,
                pk.s_lo, pk.s_hi, pk.s_sid, pk.s_diag,
                self.gamma_e, self.gamma_r, self.raise_map, self.n_e, self.n_r)
        pieces = _piecewise(pk, times)
        next_sample = 0
        t_cur = pk.t_start
        while next_sample < times.size and times[next_sample] <= t_cur + 1e-15:
            samples[next_sample] = rho
            next_sample += 1
        for lo, hi in pieces:
            nsteps, dt = _segment_steps(lo, hi, pk, self.step_divisor)
            if nsteps == 0 and (self.gamma_e > 0 or self.gamma_r > 0):
                # decay continues between pulses
                fmax = max(self.gamma_e, self.gamma_r) / TWO_PI
                nsteps = max(1, int(math.ceil((hi - lo) * self.step_divisor * fmax)))
                dt = (hi - lo) / nsteps
            if nsteps > 0:
                _rk4_density(rho, lo, dt, nsteps, *args)
            t_cur = hi
            while next_sample < times.size and times[next_sample] <= t_cur + 1e-12:
                samples[next_sample] = rho
                herm_defect = max(herm_defect,
                                  float(np.max(np.abs(rho - rho.conj().T))))
                next_sample += 1
        while next_sample < times.size:
            samples[next_sample] = rho
            next_sample += 1
        return samples, herm_defect
