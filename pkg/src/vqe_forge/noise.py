"""Noisy estimation (Pauli-jump trajectories + readout confusion), ZNE and TREX.

Noise sites: a CNOT is one site on its pair; a weight-``w`` Pauli rotation is
compiled as a CNOT ladder, contributing ``2(w-1)`` sites on consecutive pairs
of its support.  Each site draws a uniformly random non-identity two-qubit
Pauli with probability ``p2``.  One set of ``shots`` trajectories is simulated per
circuit; each measurement group then draws one shot per trajectory with its
own random stream.
"""
from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import curve_fit

from .pauli import PauliSum, PauliTerm
from .sim import CNOT, ParamCircuit, PauliRotation, _check_params, apply_gate

log = logging.getLogger(__name__)

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_HSDG = _H @ np.diag([1, -1j])  # maps Y eigenbasis to Z


class UnrecoverableObservableError(ValueError):
    pass


class CalibrationError(KeyError):
    pass


@dataclass
class NoiseModel:
    p2: float = 0.0
    p01: float | Sequence[float] = 0.0   # P(read 1 | prepared 0)
    p10: float | Sequence[float] = 0.0   # P(read 0 | prepared 1)

    def __post_init__(self):
        for v in [self.p2, *np.atleast_1d(self.p01), *np.atleast_1d(self.p10)]:
            if not 0.0 <= float(v) <= 1.0:
                raise ValueError(f"probability {v} outside [0, 1]")

    def readout(self, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
        p01 = np.broadcast_to(np.asarray(self.p01, float), (n_qubits,)).copy()
        p10 = np.broadcast_to(np.asarray(self.p10, float), (n_qubits,)).copy()
        return p01, p10

    @property
    def ideal_readout(self) -> bool:
        return not (np.any(np.asarray(self.p01)) or np.any(np.asarray(self.p10)))


@dataclass
class ZNEConfig:
    scale_factors: tuple = (1, 3, 5)
    extrapolator: str = "richardson"
    shots: int = 10_000
    seed: int = 0

    def __post_init__(self):
        f = list(self.scale_factors)
        if not f or f[0] != 1 or any(b <= a for a, b in zip(f, f[1:])):
            raise ValueError("scale factors must start at 1 and increase strictly")
        if any(int(s) != s or s % 2 == 0 for s in f):
            raise ValueError("scale factors must be odd integers")
        if self.extrapolator not in ("linear", "richardson", "exponential"):
            raise ValueError(f"unknown extrapolator {self.extrapolator!r}")
        self.scale_factors = tuple(int(s) for s in f)


@dataclass
class TrexCalibration:
    factors: dict            # Z-support bitmask -> twirled attenuation f_b
    shots: int
    seed: int
    f_min: float = 0.05


def noise_sites(gate) -> list[tuple[int, int]]:
    if isinstance(gate, CNOT):
        return [(gate.control, gate.target)]
    if isinstance(gate, PauliRotation):
        qs = gate.pauli.qubits()
        ladder = list(zip(qs, qs[1:]))
        return ladder + ladder[::-1]
    return []


def count_noise_sites(circuit: ParamCircuit) -> int:
    return sum(len(noise_sites(g)) for g in circuit.gates)


def fold_circuit(circuit: ParamCircuit, scale: int) -> ParamCircuit:
    """Global folding ``G (G^dagger G)^k`` with ``scale = 2k + 1``."""
    if int(scale) != scale or scale < 1 or scale % 2 == 0:
        raise ValueError(f"scale must be an odd integer >= 1, got {scale}")
    k = (int(scale) - 1) // 2
    inv = circuit.inverse().gates
    gates = list(circuit.gates) + (inv + list(circuit.gates)) * k
    return ParamCircuit(circuit.n_qubits, gates, list(circuit.param_names))


def run_trajectories(circuit: ParamCircuit, params, reference, noise: NoiseModel,
                     n_traj: int, rng: np.random.Generator) -> np.ndarray:
    """Final states of ``n_traj`` trajectories, shape ``(n_traj, 2^n)``.

    Without gate noise all trajectories coincide and a single row is returned.
    """
    params = _check_params(circuit, params)
    n = circuit.n_qubits
    psi0 = np.asarray(getattr(reference, "amplitudes", reference), dtype=complex)
    if noise.p2 == 0.0:
        psi = psi0[None, :]
        for g in circuit.gates:
            psi = apply_gate(g, n, psi, params)
        return psi
    idx = np.arange(1 << n, dtype=np.int64)
    psi = np.tile(psi0, (n_traj, 1))
    for g in circuit.gates:
        psi = apply_gate(g, n, psi, params)
        for q1, q2 in noise_sites(g):
            hit = np.flatnonzero(rng.random(n_traj) < noise.p2)
            if hit.size == 0:
                continue
            # per-qubit code: bit0 = x, bit1 = z; code 0 (identity on both) excluded
            codes = rng.integers(1, 16, size=hit.size)
            a, b = codes & 3, codes >> 2
            xm = ((a & 1) << q1) | ((b & 1) << q2)
            zm = ((a >> 1) << q1) | ((b >> 1) << q2)
            src = idx[None, :] ^ xm[:, None]
            sign = 1 - 2 * (np.bitwise_count(src & zm[:, None]) & 1).astype(float)
            phase = np.array([1, 1j, -1, -1j])[np.bitwise_count(xm & zm) % 4]
            psi[hit] = phase[:, None] * sign * np.take_along_axis(psi[hit], src, axis=1)
    return psi


def measurement_groups(h: PauliSum) -> list[tuple[dict, list]]:
    """Greedy qubit-wise commuting groups: ``[(basis, [(coeff, term), ...])]``."""
    groups: list[tuple[dict, list]] = []
    for c, t in h.terms:
        if t.is_identity():
            continue
        letters = {q: ch for q, ch in enumerate(t.label) if ch != "I"}
        for basis, members in groups:
            if all(basis.get(q, ch) == ch for q, ch in letters.items()):
                basis.update(letters)
                members.append((c, t))
                break
        else:
            groups.append((dict(letters), [(c, t)]))
    return groups


def _rotate_basis(psi: np.ndarray, basis: dict, n: int) -> np.ndarray:
    for q, ch in basis.items():
        if ch == "Z":
            continue
        u = _H if ch == "X" else _HSDG
        b = psi.shape[0]
        view = psi.reshape(b, 1 << (n - q - 1), 2, 1 << q)
        psi = np.einsum("ij,ahjl->ahil", u, view).reshape(b, -1)
    return psi


def _sample_bits(psi: np.ndarray, shots: int, n: int, rng) -> np.ndarray:
    probs = np.abs(psi) ** 2
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random(shots)
    if psi.shape[0] == 1:
        idx = np.searchsorted(cdf[0], u, side="right")
    else:
        idx = (cdf < u[:, None]).sum(axis=1)
    idx = np.minimum(idx, (1 << n) - 1)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)


def _readout(bits: np.ndarray, noise: NoiseModel, rng, twirl: bool) -> np.ndarray:
    n = bits.shape[1]
    p01, p10 = noise.readout(n)
    mask = rng.integers(0, 2, size=bits.shape, dtype=np.int8) if twirl else None
    if twirl:
        bits = bits ^ mask          # X on masked qubits right before measurement
    u = rng.random(bits.shape)
    flip = np.where(bits == 0, u < p01, u < p10)
    bits = bits ^ flip.astype(np.int8)
    if twirl:
        bits = bits ^ mask          # undo the mask classically
    return bits


def _parity_mean(bits: np.ndarray, support: int) -> float:
    cols = [q for q in range(bits.shape[1]) if (support >> q) & 1]
    par = bits[:, cols].sum(axis=1) & 1
    return float(np.mean(1 - 2 * par.astype(float)))


def _estimate(circuit, params, h: PauliSum, noise: NoiseModel, shots: int, seed, *,
              reference=None, twirl=False, calib: TrexCalibration | None = None, task=0) -> float:
    if shots <= 0:
        raise ValueError("shots must be positive")
    n = circuit.n_qubits
    if reference is None:
        reference = np.zeros(1 << n, dtype=complex)
        reference[0] = 1.0
    rng = np.random.default_rng([int(seed), int(task)])
    final = run_trajectories(circuit, params, reference, noise, shots, rng)
    total = h.constant()
    for gi, (basis, members) in enumerate(measurement_groups(h)):
        rng = np.random.default_rng([int(seed), int(task), gi + 1])
        psi = _rotate_basis(final, basis, n)
        bits = _readout(_sample_bits(psi, shots, n, rng), noise, rng, twirl)
        for c, t in members:
            val = _parity_mean(bits, t.support)
            if calib is not None:
                try:
                    val /= calib.factors[t.support]
                except KeyError:
                    raise CalibrationError(f"no TREX calibration for support of {t.label}") from None
            total += c.real * val
    return float(total)


def noisy_energy(circuit: ParamCircuit, params, h: PauliSum, noise: NoiseModel, shots: int,
                 seed, reference=None, task=0) -> float:
    """Shot-based energy estimate under gate and readout noise (no mitigation)."""
    return _estimate(circuit, params, h, noise, shots, seed, reference=reference, task=task)


def zne_extrapolate(points, cfg: ZNEConfig | str = "richardson", info: dict | None = None) -> float:
    """Zero-noise value from ``[(scale, value), ...]``."""
    method = cfg if isinstance(cfg, str) else cfg.extrapolator
    pts = sorted((float(s), float(v)) for s, v in points)
    if len(pts) < 2:
        raise ValueError("extrapolation needs at least two points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if len(set(x)) != len(x):
        raise ValueError("duplicate scale factors")
    if method == "linear":
        return float(np.polyfit(x, y, 1)[1])
    if method == "richardson":
        w = np.array([np.prod([xj / (xj - xi) for xj in x if xj != xi]) for xi in x])
        return float(w @ y)
    if method == "exponential":
        def model(lam, a, b, c):
            return a + b * np.exp(-c * lam)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                span = max(x[-1] - x[0], 1.0)
                popt, _ = curve_fit(model, x, y, p0=(y[-1], y[0] - y[-1], 1.0 / span),
                                    method="lm", maxfev=200)
            if not np.all(np.isfinite(popt)) or popt[2] <= 0:
                raise RuntimeError("non-decaying exponential fit")
            return float(popt[0])
        except (RuntimeError, ValueError, TypeError) as exc:
            log.warning("exponential ZNE fit failed (%s); falling back to linear", exc)
            if info is not None:
                info["fallback"] = f"linear ({exc})"
            return float(np.polyfit(x, y, 1)[1])
    raise ValueError(f"unknown extrapolator {method!r}")


def zne_energy(circuit, params, h, noise, cfg: ZNEConfig, reference=None, calib=None,
               info: dict | None = None) -> float:
    """Estimate at each folded scale (TREX-mitigated when ``calib`` is given), then extrapolate."""
    points = []
    for s in cfg.scale_factors:
        folded = fold_circuit(circuit, s)
        val = _estimate(folded, params, h, noise, cfg.shots, cfg.seed, reference=reference,
                        twirl=calib is not None, calib=calib, task=s)
        points.append((s, val))
    if info is not None:
        info["points"] = points
    return zne_extrapolate(points, cfg, info)


def trex_supports(h: PauliSum) -> list[int]:
    return sorted({t.support for _, members in measurement_groups(h) for _, t in members})


def trex_calibrate(h: PauliSum, noise: NoiseModel, shots: int, seed, f_min: float = 0.05) -> TrexCalibration:
    """Twirled readout attenuation for every measured Z-support of ``h``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    n = h.n_qubits
    rng = np.random.default_rng([int(seed), 1_000_003])
    bits = _readout(np.zeros((shots, n), dtype=np.int8), noise, rng, twirl=True)
    factors = {}
    for b in trex_supports(h):
        f = _parity_mean(bits, b)
        if f <= f_min:
            label = "".join("Z" if (b >> q) & 1 else "I" for q in range(n))
            raise UnrecoverableObservableError(
                f"twirled attenuation {f:.4f} of {label} is below f_min={f_min}")
        factors[b] = f
    return TrexCalibration(factors, shots, int(seed), f_min)


def trex_energy(circuit, params, h: PauliSum, noise: NoiseModel, calib: TrexCalibration,
                shots: int, seed, reference=None, task=0) -> float:
    return _estimate(circuit, params, h, noise, shots, seed, reference=reference,
                     twirl=True, calib=calib, task=task)


def symmetrized_confusion(p01: float, p10: float) -> np.ndarray:
    """Readout confusion averaged over an X-mask bit; columns index the prepared state."""
    m = np.array([[1 - p01, p10], [p01, 1 - p10]])
    x = np.array([[0, 1], [1, 0]])
    return 0.5 * (m + x @ m @ x)


MITIGATION_METHODS = ("none", "zne", "trex", "zne+trex")


def mitigation_experiment(circuit, params, h, noise: NoiseModel, zne: ZNEConfig, seeds,
                          reference=None, exact: float | None = None,
                          methods=MITIGATION_METHODS, calib_shots: int | None = None) -> list[dict]:
    """One row per (method, seed): ``method,scale_or_mask,seed,estimate,exact,abs_error``."""
    from .sim import energy as exact_energy

    if exact is None:
        ref = reference
        if ref is None:
            ref = np.zeros(1 << circuit.n_qubits, dtype=complex)
            ref[0] = 1.0
        exact = exact_energy(circuit, params, h, ref)
    scales = "|".join(map(str, zne.scale_factors))
    rows = []
    for seed in seeds:
        cfg = ZNEConfig(zne.scale_factors, zne.extrapolator, zne.shots, seed)
        calib = None
        if "trex" in methods or "zne+trex" in methods:
            calib = trex_calibrate(h, noise, calib_shots or zne.shots, seed)
        for method in methods:
            if method == "none":
                est, tag = noisy_energy(circuit, params, h, noise, zne.shots, seed,
                                        reference=reference, task=1), "1"
            elif method == "zne":
                est, tag = zne_energy(circuit, params, h, noise, cfg, reference=reference), scales
            elif method == "trex":
                est, tag = trex_energy(circuit, params, h, noise, calib, zne.shots, seed,
                                       reference=reference, task=1), "random-x"
            elif method == "zne+trex":
                est, tag = zne_energy(circuit, params, h, noise, cfg, reference=reference,
                                      calib=calib), scales + "/random-x"
            else:
                raise ValueError(f"unknown mitigation method {method!r}")
            rows.append({"method": method, "scale_or_mask": tag, "seed": seed, "estimate": est,
                         "exact": exact, "abs_error": abs(est - exact)})
    return rows


def mitigation_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["method", "scale_or_mask", "seed", "estimate", "exact", "abs_error"]
    w.writerow(cols)
    for r in rows:
        w.writerow([r["method"], r["scale_or_mask"], r["seed"], repr(r["estimate"]),
                    repr(r["exact"]), repr(r["abs_error"])])
    return buf.getvalue()
