"""Quantum behaviors from states and POVMs, functional evaluation, and seesaw
lower bounds on the maximal Bell violation.

The seesaw path is restricted to dichotomic (+1/-1) correlation functionals,
where the optimal single-party update is the closed-form sign-operator step.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFunctionalError,
    DomainError,
    UnsupportedFunctionalError,
    ValidationError,
)
from .linalg import as_cmatrix, eig_hermitian, frozen, hermiticity_defect
from .scenario import Behavior, BellFunctional, Scenario, lhv_bounds
from .states import DensityMatrix

COMPLETENESS_TOL = 1e-9
EFFECT_PSD_TOL = 1e-9
SIGN_EIG_TOL = 1e-12


@dataclass(frozen=True)
class Measurement:
    """Finite POVM with an outcome value in [-1, 1] attached to each effect."""

    effects: tuple[np.ndarray, ...]
    outcome_values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.effects) < 1:
            raise ValidationError("a measurement needs at least one effect")
        if len(self.effects) != len(self.outcome_values):
            raise ValidationError(
                f"{len(self.effects)} effects but {len(self.outcome_values)} outcome values"
            )
        dim = None
        canon = []
        for i, e in enumerate(self.effects):
            m = as_cmatrix(e, f"effect {i}")
            if m.shape[0] != m.shape[1]:
                raise ValidationError(f"effect {i} is not square: {m.shape}")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise ValidationError("effects have inconsistent dimensions")
            if hermiticity_defect(m) > EFFECT_PSD_TOL:
                raise ValidationError(f"effect {i} is not Hermitian")
            w, _ = eig_hermitian(m, tol=EFFECT_PSD_TOL)
            if w[-1] < -EFFECT_PSD_TOL:
                raise ValidationError(
                    f"effect {i} is not PSD (min eigenvalue {w[-1]:.3e})"
                )
            canon.append(frozen(m))
        total = sum(canon)
        if np.max(np.abs(total - np.eye(dim))) > COMPLETENESS_TOL:
            raise ValidationError("effects do not sum to the identity within 1e-9")
        values = tuple(float(v) for v in self.outcome_values)
        if any(not -1.0 <= v <= 1.0 for v in values):
            raise ValidationError("outcome values must lie in [-1, 1]")
        object.__setattr__(self, "effects", tuple(canon))
        object.__setattr__(self, "outcome_values", values)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    @classmethod
    def computational_basis(cls, d: int, values=None) -> "Measurement":
        vals = values if values is not None else tuple(np.linspace(-1.0, 1.0, d)) if d > 1 else (1.0,)
        eye = np.eye(d, dtype=np.complex128)
        return cls(tuple(np.outer(eye[:, k], eye[:, k].conj()) for k in range(d)), tuple(vals))

    @classmethod
    def dichotomic_from_observable(cls, obs: np.ndarray) -> "Measurement":
        """Projective +1/-1 measurement splitting the observable's spectrum at 0."""
        w, v = eig_hermitian(obs)
        plus = np.zeros_like(obs, dtype=np.complex128)
        for k, eig in enumerate(w):
            if eig >= 0.0:
                plus += np.outer(v[:, k], v[:, k].conj())
        minus = np.eye(obs.shape[0], dtype=np.complex128) - plus
        return cls((plus, minus), (1.0, -1.0))

    def observable(self) -> np.ndarray:
        """Weighted effect sum, the Hermitian operator with these outcome values."""
        return sum(v * e for v, e in zip(self.outcome_values, self.effects))


@dataclass(frozen=True)
class MeasurementAssignment:
    """One Measurement per (party, setting); all sites share the dimension d."""

    measurements: tuple[tuple[Measurement, ...], ...]

    def __post_init__(self) -> None:
        if len(self.measurements) < 1:
            raise ValidationError("assignment needs at least one party")
        dims = {m.dim for party in self.measurements for m in party}
        if len(dims) != 1:
            raise ValidationError(f"site dimensions differ: {sorted(dims)}")
        object.__setattr__(self, "measurements", tuple(tuple(p) for p in self.measurements))

    @property
    def parties(self) -> int:
        return len(self.measurements)

    @property
    def site_dim(self) -> int:
        return self.measurements[0][0].dim

    def scenario(self) -> Scenario:
        return Scenario(
            tuple(tuple(m.outcome_values for m in party) for party in self.measurements)
        )

    def to_json_dict(self) -> dict:
        def eff(e: np.ndarray) -> dict:
            return {"re": [float(x) for x in e.real.ravel()],
                    "im": [float(x) for x in e.imag.ravel()]}

        return {
            "d": self.site_dim,
            "parties": [
                [
                    {"effects": [eff(e) for e in m.effects],
                     "outcome_values": list(m.outcome_values)}
                    for m in party
                ]
                for party in self.measurements
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MeasurementAssignment":
        try:
            d = int(data["d"])
            parties = data["parties"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed assignment JSON: {exc}") from exc
        built = []
        for party in parties:
            row = []
            for m in party:
                effects = []
                for e in m["effects"]:
                    re = np.asarray(e["re"], dtype=float)
                    im = np.asarray(e["im"], dtype=float)
                    if re.size != d * d or im.size != d * d:
                        raise ValidationError("effect entry count does not match dimension")
                    effects.append((re + 1j * im).reshape(d, d))
                row.append(Measurement(tuple(effects), tuple(m["outcome_values"])))
            built.append(tuple(row))
        return cls(tuple(built))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path: str) -> "MeasurementAssignment":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def _rho_tensor(rho: DensityMatrix) -> np.ndarray:
    return rho.matrix.reshape((rho.d,) * (2 * rho.n))


def _expectation(rho_t: np.ndarray, ops: list[np.ndarray | None]) -> float:
    """tr[rho (O_1 x ... x O_n)] with None meaning identity at that site."""
    n = len(ops)
    args: list = [rho_t, list(range(2 * n))]
    for site, op in enumerate(ops):
        if op is None:
            continue
        args.extend([op, [n + site, site]])
    # identity sites reduce to a bra/ket index trace: rename the column index
    # of each such site to its row index
    ident = [s for s, op in enumerate(ops) if op is None]
    if ident:
        sub_in = list(range(2 * n))
        for s in ident:
            sub_in[n + s] = s
        args[1] = sub_in
    out = np.einsum(*args, [])
    return complex(out).real


def _local_operator(rho_t: np.ndarray, ops: list[np.ndarray | None], site: int) -> np.ndarray:
    """K with tr[rho (O_1 x ... A_site ... x O_n)] = tr[K A_site], identity for None."""
    n = len(ops)
    sub_in = list(range(2 * n))
    args: list = [rho_t, sub_in]
    for s, op in enumerate(ops):
        if s == site:
            continue
        if op is None:
            sub_in[n + s] = s
            continue
        args.extend([op, [n + s, s]])
    out = np.einsum(*args, [site, n + site])
    return out


def behavior(rho: DensityMatrix, meas: MeasurementAssignment) -> Behavior:
    """Joint probability tables p(outcomes | settings) = tr[rho (M_1 x ... x M_n)]."""
    if meas.parties != rho.n:
        raise ValidationError(f"assignment has {meas.parties} parties, state has {rho.n}")
    if meas.site_dim != rho.d:
        raise ValidationError(
            f"assignment site dimension {meas.site_dim} != state dimension {rho.d}"
        )
    sc = meas.scenario()
    n = rho.n
    rho_t = _rho_tensor(rho)
    tables = {}
    for s in sc.joint_settings():
        stacks = [np.stack(meas.measurements[p][s_p].effects) for p, s_p in enumerate(s)]
        args: list = [rho_t, list(range(2 * n))]
        for p, stack in enumerate(stacks):
            args.extend([stack, [2 * n + p, n + p, p]])
        table = np.einsum(*args, [2 * n + p for p in range(n)]).real
        # clip roundoff-negative entries at the 1e-12 invariant boundary
        table[(table < 0) & (table > -1e-12)] = 0.0
        tables[s] = table
    return Behavior(scenario=sc, tables=tables)


def evaluate(f: BellFunctional, b: Behavior) -> float:
    """Sum over joint settings and outcomes of coefficient times probability."""
    if f.scenario.settings != b.scenario.settings:
        raise ValidationError(
            f"functional settings {f.scenario.settings} != behavior settings "
            f"{b.scenario.settings}"
        )
    total = 0.0
    for s, table in f.coeffs.items():
        p = b.tables[s]
        if p.shape != table.shape:
            raise ValidationError(f"shape mismatch at joint setting {s}")
        total += float(np.sum(table * p))
    return total


def violation_ratio(
    f: BellFunctional, rho: DensityMatrix, meas: MeasurementAssignment
) -> float:
    """|functional value| / LHV constant for a fixed measurement assignment."""
    bounds = lhv_bounds(f)
    if bounds.b_lhv <= 0.0:
        raise DegenerateFunctionalError("functional has zero LHV constant")
    return abs(evaluate(f, behavior(rho, meas))) / bounds.b_lhv


# --- seesaw -----------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationTerm:
    """One joint setting of a correlation-form functional: weight times the
    product of outcome values over the participating sites."""

    setting: tuple[int, ...]
    weight: float
    participates: tuple[bool, ...]


def correlation_form(f: BellFunctional) -> list[CorrelationTerm]:
    """Decompose a functional into correlation terms.

    Requires two outcomes valued (+1, -1) or (-1, +1) at every setting, and
    every table equal to a weight times a product of outcome values over a
    subset of sites (constant over the rest). Raises UnsupportedFunctionalError
    otherwise.
    """
    sc = f.scenario
    for p, party in enumerate(sc.outcomes):
        for s, vals in enumerate(party):
            if sorted(vals) != [-1.0, 1.0]:
                raise UnsupportedFunctionalError(
                    f"party {p}, setting {s} outcomes {vals} are not a (+1, -1) pair"
                )
    terms = []
    for s, table in f.coeffs.items():
        n = table.ndim
        if np.max(np.abs(table)) < 1e-15:
            continue
        flat = np.argmax(np.abs(table))
        ref = tuple(int(i) for i in np.unravel_index(flat, table.shape))
        participates = []
        for p in range(n):
            flipped = list(ref)
            flipped[p] = 1 - ref[p]
            ratio = table[tuple(flipped)] / table[ref]
            if abs(ratio + 1.0) < 1e-9:
                participates.append(True)
            elif abs(ratio - 1.0) < 1e-9:
                participates.append(False)
            else:
                raise UnsupportedFunctionalError(
                    f"table at joint setting {s} does not factor into outcome products"
                )
        vals = [sc.outcomes[p][s_p] for p, s_p in enumerate(s)]
        weight = float(table[ref])
        for p in range(n):
            if participates[p]:
                weight /= vals[p][ref[p]]
        # verify the factorization against the full table
        rebuilt = np.full(table.shape, weight)
        for p in range(n):
            factor = np.asarray(vals[p]) if participates[p] else np.ones(2)
            shape = [1] * n
            shape[p] = 2
            rebuilt = rebuilt * factor.reshape(shape)
        if np.max(np.abs(rebuilt - table)) > 1e-9:
            raise UnsupportedFunctionalError(
                f"table at joint setting {s} is not of correlation form"
            )
        terms.append(CorrelationTerm(s, weight, tuple(participates)))
    if not terms:
        raise UnsupportedFunctionalError("functional is identically zero")
    return terms


@dataclass(frozen=True)
class SeesawResult:
    value: float
    assignment: MeasurementAssignment
    trace: tuple[float, ...]
    restarts_used: int
    objective: float = 0.0  # signed functional value at the returned assignment


def _haar_basis(d: int, rng: np.random.Generator) -> np.ndarray:
    """Columns of a Haar-random unitary (Ginibre + QR with phase fix)."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))


def _random_observable(d: int, rng: np.random.Generator) -> np.ndarray:
    # even +1/-1 eigenvalue split over a Haar-random basis
    basis = _haar_basis(d, rng)
    signs = np.array([1.0 if k < (d + 1) // 2 else -1.0 for k in range(d)])
    return (basis * signs) @ basis.conj().T


def sign_operator(h: np.ndarray) -> np.ndarray:
    """sign(h) via eigendecomposition; eigenvalues within 1e-12 of zero map to +1."""
    w, v = eig_hermitian(h, tol=1e-8)
    signs = np.where(w < -SIGN_EIG_TOL, -1.0, 1.0)
    return (v * signs) @ v.conj().T


def _objective(rho_t: np.ndarray, terms: list[CorrelationTerm], obs) -> float:
    total = 0.0
    for t in terms:
        ops = [
            obs[p][s_p] if t.participates[p] else None
            for p, s_p in enumerate(t.setting)
        ]
        total += t.weight * _expectation(rho_t, ops)
    return total


def seesaw(
    f: BellFunctional,
    rho: DensityMatrix,
    restarts: int = 20,
    seed: int = 0,
    sweep_tol: float = 1e-10,
    max_sweeps: int = 500,
) -> SeesawResult:
    """Heuristic lower bound on the maximal violation of ``f`` by ``rho``.

    Alternates over parties, replacing each party's dichotomic observables by
    the sign of the local operator obtained by contracting the state with the
    other parties' fixed observables; the objective never decreases. Each
    restart draws fresh Haar-random projective observables from a stream
    seeded by (seed, restart). Returns the best restart.
    """
    terms = correlation_form(f)
    bounds = lhv_bounds(f)
    if bounds.b_lhv <= 0.0:
        raise DegenerateFunctionalError("functional has zero LHV constant")
    sc = f.scenario
    if sc.parties != rho.n:
        raise ValidationError(f"functional has {sc.parties} parties, state has {rho.n}")
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    d = rho.d
    rho_t = _rho_tensor(rho)

    best_abs = -1.0
    best_obs: list[list[np.ndarray]] | None = None
    best_trace: tuple[float, ...] = ()
    best_objective = 0.0
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        obs = [
            [_random_observable(d, rng) for _ in range(sc.settings[p])]
            for p in range(sc.parties)
        ]
        value = _objective(rho_t, terms, obs)
        trace = []
        for _ in range(max_sweeps):
            for party in range(sc.parties):
                locals_ = [np.zeros((d, d), dtype=np.complex128) for _ in range(sc.settings[party])]
                touched = [False] * sc.settings[party]
                for t in terms:
                    if not t.participates[party]:
                        continue
                    ops = [
                        obs[p][s_p] if t.participates[p] else None
                        for p, s_p in enumerate(t.setting)
                    ]
                    k = _local_operator(rho_t, ops, party)
                    s_here = t.setting[party]
                    locals_[s_here] = locals_[s_here] + t.weight * k
                    touched[s_here] = True
                for s_here, hit in enumerate(touched):
                    # a vanishing local operator carries no update direction
                    # (every observable is optimal); keep the current one
                    if hit and np.max(np.abs(locals_[s_here])) > SIGN_EIG_TOL:
                        obs[party][s_here] = sign_operator(locals_[s_here])
            new_value = _objective(rho_t, terms, obs)
            trace.append(new_value)
            if new_value < value - 1e-12:
                raise ValidationError(
                    f"seesaw objective decreased from {value!r} to {new_value!r}"
                )
            if new_value - value < sweep_tol:
                value = new_value
                break
            value = new_value
        if abs(value) > best_abs:
            best_abs = abs(value)
            best_obs = [list(row) for row in obs]
            best_trace = tuple(trace)
            best_objective = value

    assert best_obs is not None
    assignment = MeasurementAssignment(
        tuple(
            tuple(Measurement.dichotomic_from_observable(o) for o in row)
            for row in best_obs
        )
    )
    return SeesawResult(
        value=best_abs / bounds.b_lhv,
        assignment=assignment,
        trace=best_trace,
        restarts_used=restarts,
        objective=best_objective,
    )


@dataclass(frozen=True)
class UpsilonLowerBound:
    value: float
    best_label: str
    best_index: int
    result: SeesawResult
    per_functional: tuple[tuple[str, float], ...]


def upsilon_lower_bound(
    rho: DensityMatrix,
    functional_library: list[BellFunctional],
    restarts: int = 20,
    seed: int = 0,
    sweep_tol: float = 1e-10,
    max_sweeps: int = 500,
) -> UpsilonLowerBound:
    """Best seesaw violation over a functional library: a certified lower bound
    on the maximal violation, with the achieving functional's identity."""
    if not functional_library:
        raise DomainError("functional library must be nonempty")
    best: SeesawResult | None = None
    best_i = -1
    per = []
    for i, f in enumerate(functional_library):
        res = seesaw(f, rho, restarts=restarts, seed=seed,
                     sweep_tol=sweep_tol, max_sweeps=max_sweeps)
        per.append((f.label or f"functional{i}", res.value))
        if best is None or res.value > best.value:
            best, best_i = res, i
    assert best is not None
    label = functional_library[best_i].label or f"functional{best_i}"
    return UpsilonLowerBound(
        value=best.value, best_label=label, best_index=best_i,
        result=best, per_functional=tuple(per),
    )


def write_sweep_trace(path: str, trace: tuple[float, ...]) -> None:
    """Per-sweep objective values as a two-column CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sweep", "objective"])
        for i, v in enumerate(trace):
            writer.writerow([i + 1, repr(v)])
