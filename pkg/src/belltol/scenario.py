"""Correlation scenarios, Bell functionals over discrete outcomes, behaviors,
deterministic-strategy enumeration and exact LHV constants.

A functional is stored as one dense real coefficient table per joint setting,
so evaluation against a behavior is a plain tensor contraction.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, ResourceCapError, ValidationError

DEFAULT_ENUM_CAP = 10**8

# A deterministic strategy fixes one outcome index per (party, setting).
Strategy = tuple[tuple[int, ...], ...]


def default_outcome_grid(m: int) -> tuple[float, ...]:
    """Equally spaced outcome values from -1 to +1; (-1, +1) for m = 2."""
    if m < 1:
        raise DomainError(f"need at least one outcome, got {m}")
    if m == 1:
        return (1.0,)
    return tuple(float(x) for x in np.linspace(-1.0, 1.0, m))


@dataclass(frozen=True)
class Scenario:
    """Measurement layout: per party, per setting, the list of outcome values.

    Outcome values are reals in [-1, 1]; parties and settings are 0-indexed.
    """

    outcomes: tuple[tuple[tuple[float, ...], ...], ...]

    def __post_init__(self) -> None:
        if len(self.outcomes) < 1:
            raise DomainError("a scenario needs at least one party")
        canon = []
        for p, party in enumerate(self.outcomes):
            if len(party) < 1:
                raise DomainError(f"party {p} needs at least one setting")
            rows = []
            for s, values in enumerate(party):
                if len(values) < 1:
                    raise DomainError(f"party {p}, setting {s} has no outcomes")
                vals = tuple(float(v) for v in values)
                if any(not -1.0 <= v <= 1.0 or not math.isfinite(v) for v in vals):
                    raise ValidationError(
                        f"outcome values for party {p}, setting {s} must lie in [-1, 1]"
                    )
                rows.append(vals)
            canon.append(tuple(rows))
        object.__setattr__(self, "outcomes", tuple(canon))

    @classmethod
    def uniform(
        cls, parties: int, settings: int, n_outcomes: int = 2,
        values: Sequence[float] | None = None,
    ) -> "Scenario":
        """Same settings count and outcome values at every site."""
        vals = tuple(values) if values is not None else default_outcome_grid(n_outcomes)
        return cls(tuple(tuple(vals for _ in range(settings)) for _ in range(parties)))

    @property
    def parties(self) -> int:
        return len(self.outcomes)

    @property
    def settings(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.outcomes)

    def outcome_counts(self, joint_setting: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(len(self.outcomes[p][s]) for p, s in enumerate(joint_setting))

    def joint_settings(self) -> Iterator[tuple[int, ...]]:
        """All joint settings, lexicographically."""
        return itertools.product(*(range(len(p)) for p in self.outcomes))


def strategy_count(sc: Scenario) -> int:
    count = 1
    for p, party in enumerate(sc.outcomes):
        for values in party:
            count *= len(values)
    return count


def enumerate_strategies(sc: Scenario, cap: int = DEFAULT_ENUM_CAP) -> Iterator[Strategy]:
    """Yield every deterministic strategy once, lexicographically in the
    flattened (party, setting) index tuple."""
    total = strategy_count(sc)
    if total > cap:
        raise ResourceCapError(
            f"enumeration infeasible: {total} deterministic strategies exceed cap {cap}"
        )
    ranges = [range(len(values)) for party in sc.outcomes for values in party]
    widths = sc.settings

    def gen() -> Iterator[Strategy]:
        for flat in itertools.product(*ranges):
            out, pos = [], 0
            for w in widths:
                out.append(flat[pos:pos + w])
                pos += w
            yield tuple(out)

    return gen()


@dataclass(frozen=True)
class BellFunctional:
    """Linear functional on behaviors: one dense coefficient table per joint
    setting, table axes ordered by party."""

    scenario: Scenario
    coeffs: dict[tuple[int, ...], np.ndarray]
    label: str = ""

    def __post_init__(self) -> None:
        sc = self.scenario
        expected = set(sc.joint_settings())
        got = set(self.coeffs)
        if got != expected:
            raise ValidationError(
                f"coefficient tables cover {len(got)} joint settings, expected {len(expected)}"
            )
        canon: dict[tuple[int, ...], np.ndarray] = {}
        for s in sorted(self.coeffs):
            t = np.asarray(self.coeffs[s], dtype=float)
            shape = sc.outcome_counts(s)
            if t.shape != shape:
                raise ValidationError(
                    f"table for joint setting {s} has shape {t.shape}, expected {shape}"
                )
            if not np.all(np.isfinite(t)):
                raise ValidationError(f"table for joint setting {s} has non-finite entries")
            t = t.copy()
            t.setflags(write=False)
            canon[s] = t
        object.__setattr__(self, "coeffs", canon)

    def scaled(self, c: float, label: str | None = None) -> "BellFunctional":
        return BellFunctional(
            scenario=self.scenario,
            coeffs={s: c * t for s, t in self.coeffs.items()},
            label=self.label if label is None else label,
        )

    def value_at(self, strategy: Strategy) -> float:
        """Functional value on one deterministic strategy."""
        total = 0.0
        for s, table in self.coeffs.items():
            idx = tuple(strategy[p][s_p] for p, s_p in enumerate(s))
            total += float(table[idx])
        return total

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "settings": list(self.scenario.settings),
            "outcomes": [[list(v) for v in party] for party in self.scenario.outcomes],
            "coeffs": {
                ",".join(str(i + 1) for i in s): t.tolist() for s, t in self.coeffs.items()
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "BellFunctional":
        try:
            sc = Scenario(tuple(tuple(tuple(v) for v in party) for party in data["outcomes"]))
            raw = data["coeffs"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed functional JSON: {exc}") from exc
        coeffs = {}
        for key, table in raw.items():
            s = tuple(int(tok) - 1 for tok in key.split(","))
            coeffs[s] = np.asarray(table, dtype=float)
        return cls(scenario=sc, coeffs=coeffs, label=str(data.get("label", "")))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path: str) -> "BellFunctional":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class LhvBounds:
    """Exact extrema of a functional over deterministic strategies."""

    sup: float
    inf: float
    b_lhv: float

    def __post_init__(self) -> None:
        if self.inf > self.sup + 1e-12:
            raise ValidationError(f"inf {self.inf} exceeds sup {self.sup}")
        expected = max(abs(self.sup), abs(self.inf))
        if abs(self.b_lhv - expected) > 1e-12:
            raise ValidationError(f"b_lhv {self.b_lhv} != max(|sup|, |inf|) = {expected}")


def lhv_bounds(f: BellFunctional, cap: int = DEFAULT_ENUM_CAP) -> LhvBounds:
    """Exact LHV constants by full enumeration of deterministic strategies."""
    sup, inf = -math.inf, math.inf
    for strategy in enumerate_strategies(f.scenario, cap=cap):
        v = f.value_at(strategy)
        if v > sup:
            sup = v
        if v < inf:
            inf = v
    return LhvBounds(sup=sup, inf=inf, b_lhv=max(abs(sup), abs(inf)))


def _product_table(values: Sequence[Sequence[float]]) -> np.ndarray:
    """Outer product of per-party value vectors."""
    table = np.asarray(values[0], dtype=float)
    for v in values[1:]:
        table = np.multiply.outer(table, np.asarray(v, dtype=float))
    return table


def correlation_functional(
    sc: Scenario, weights: dict[tuple[int, ...], float], label: str = ""
) -> BellFunctional:
    """Functional whose table at joint setting s is w_s times the full product
    of the parties' outcome values (a weighted sum of correlation functions)."""
    coeffs = {}
    for s in sc.joint_settings():
        w = float(weights.get(s, 0.0))
        vals = [sc.outcomes[p][s_p] for p, s_p in enumerate(s)]
        coeffs[s] = w * _product_table(vals)
    return BellFunctional(scenario=sc, coeffs=coeffs, label=label)


def chsh() -> BellFunctional:
    """Two-party two-setting correlation functional A1B1 + A1B2 + A2B1 - A2B2,
    outcomes (+1, -1); LHV constant 2."""
    sc = Scenario.uniform(2, 2, values=(1.0, -1.0))
    weights = {(0, 0): 1.0, (0, 1): 1.0, (1, 0): 1.0, (1, 1): -1.0}
    return correlation_functional(sc, weights, label="chsh")


def _mk_weights(n: int) -> dict[tuple[int, ...], float]:
    # M_1 = a_1; M_k = (M_{k-1} (a_k + a_k') + M'_{k-1} (a_k - a_k')) / 2,
    # where priming swaps the two settings of every party.
    weights: dict[tuple[int, ...], float] = {(0,): 1.0}
    for _ in range(n - 1):
        primed = {tuple(1 - s for s in key): c for key, c in weights.items()}
        new: dict[tuple[int, ...], float] = {}
        for key, c in weights.items():
            for s in (0, 1):
                new[key + (s,)] = new.get(key + (s,), 0.0) + 0.5 * c
        for key, c in primed.items():
            for s, sign in ((0, 1.0), (1, -1.0)):
                new[key + (s,)] = new.get(key + (s,), 0.0) + 0.5 * c * sign
        weights = new
    return weights


def mermin(n: int) -> BellFunctional:
    """Mermin-Klyshko correlation functional for n parties, two dichotomic
    (+1/-1) settings per site, scaled so the LHV constant is 2 for every n
    (mermin(2) coincides with chsh())."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    sc = Scenario.uniform(n, 2, values=(1.0, -1.0))
    weights = {key: 2.0 * c for key, c in _mk_weights(n).items() if c != 0.0}
    return correlation_functional(sc, weights, label=f"mermin{n}")


def product_expectation_functional(
    sc: Scenario, joint_setting: tuple[int, ...], site_subset: Sequence[int]
) -> BellFunctional:
    """Expectation of the product of outcomes over ``site_subset`` at one joint
    setting (a single correlation function); excluded sites enter as constant 1."""
    subset = sorted(set(site_subset))
    if not subset:
        raise DomainError("site subset must be nonempty")
    if any(p < 0 or p >= sc.parties for p in subset):
        raise DomainError(f"site subset {subset} invalid for {sc.parties} parties")
    joint_setting = tuple(joint_setting)
    if len(joint_setting) != sc.parties or any(
        s < 0 or s >= sc.settings[p] for p, s in enumerate(joint_setting)
    ):
        raise DomainError(f"invalid joint setting {joint_setting} for scenario {sc.settings}")
    coeffs = {}
    for s in sc.joint_settings():
        if s == joint_setting:
            vals = [
                sc.outcomes[p][s_p] if p in subset else np.ones(len(sc.outcomes[p][s_p]))
                for p, s_p in enumerate(s)
            ]
            coeffs[s] = _product_table(vals)
        else:
            coeffs[s] = np.zeros(sc.outcome_counts(s))
    return BellFunctional(scenario=sc, coeffs=coeffs, label="product-expectation")


def extend_with_passive_parties(f: BellFunctional, extra: int) -> BellFunctional:
    """Append ``extra`` single-setting parties with outcomes (+1, -1) whose
    outcome value multiplies every table (keeps correlation form)."""
    if extra < 1:
        raise DomainError(f"extra must be >= 1, got {extra}")
    tail = tuple(((1.0, -1.0),) for _ in range(extra))
    sc = Scenario(f.scenario.outcomes + tail)
    lam = np.array([1.0, -1.0])
    coeffs = {}
    for s, table in f.coeffs.items():
        t = table
        for _ in range(extra):
            t = np.multiply.outer(t, lam)
        coeffs[s + (0,) * extra] = t
    label = f.label + f"+{extra}passive" if f.label else ""
    return BellFunctional(scenario=sc, coeffs=coeffs, label=label)


@dataclass(frozen=True)
class Behavior:
    """Joint outcome probability tables, one per joint setting.

    Construction validates normalization (1e-9), nonnegativity (1e-12) and
    nonsignaling (1e-9); pass ``validate=False`` only for data known sound by
    construction.
    """

    scenario: Scenario
    tables: dict[tuple[int, ...], np.ndarray]
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        sc = self.scenario
        expected = set(sc.joint_settings())
        if set(self.tables) != expected:
            raise ValidationError(
                f"behavior covers {len(self.tables)} joint settings, expected {len(expected)}"
            )
        canon = {}
        for s in sorted(self.tables):
            t = np.asarray(self.tables[s], dtype=float)
            if t.shape != sc.outcome_counts(s):
                raise ValidationError(
                    f"table for joint setting {s} has shape {t.shape}, "
                    f"expected {sc.outcome_counts(s)}"
                )
            t = t.copy()
            t.setflags(write=False)
            canon[s] = t
        object.__setattr__(self, "tables", canon)
        if self.validate:
            self._check_distribution()
            self._check_nonsignaling()

    def _check_distribution(self, neg_tol: float = 1e-12, sum_tol: float = 1e-9) -> None:
        for s, t in self.tables.items():
            if t.min() < -neg_tol:
                raise ValidationError(
                    f"negative probability {t.min():.3e} at joint setting {s}"
                )
            total = float(t.sum())
            if abs(total - 1.0) > sum_tol:
                raise ValidationError(f"table at joint setting {s} sums to {total!r}")

    def _check_nonsignaling(self, tol: float = 1e-9) -> None:
        sc = self.scenario
        for party in range(sc.parties):
            others = [range(m) for p, m in enumerate(sc.settings) if p != party]
            for rest in itertools.product(*others):
                def joint(s_party: int) -> tuple[int, ...]:
                    s = list(rest)
                    s.insert(party, s_party)
                    return tuple(s)

                ref = self.tables[joint(0)].sum(axis=party)
                for s_party in range(1, sc.settings[party]):
                    marg = self.tables[joint(s_party)].sum(axis=party)
                    if np.max(np.abs(marg - ref)) > tol:
                        raise ValidationError(
                            f"signaling marginal for party {party}: settings 0 vs "
                            f"{s_party} differ by {np.max(np.abs(marg - ref)):.3e}"
                        )

    def vector(self) -> np.ndarray:
        """Flatten in the canonical row order shared with the LP vertex matrix."""
        return np.concatenate([self.tables[s].ravel() for s in sorted(self.tables)])


def behavior_row_count(sc: Scenario) -> int:
    return sum(int(np.prod(sc.outcome_counts(s))) for s in sc.joint_settings())


def deterministic_behavior(sc: Scenario, strategy: Strategy, validate: bool = True) -> Behavior:
    """Point-mass behavior of one deterministic strategy."""
    tables = {}
    for s in sc.joint_settings():
        t = np.zeros(sc.outcome_counts(s))
        t[tuple(strategy[p][s_p] for p, s_p in enumerate(s))] = 1.0
        tables[s] = t
    return Behavior(scenario=sc, tables=tables, validate=validate)


def uniform_behavior(sc: Scenario) -> Behavior:
    """Independent uniform outcomes at every site."""
    tables = {}
    for s in sc.joint_settings():
        shape = sc.outcome_counts(s)
        tables[s] = np.full(shape, 1.0 / float(np.prod(shape)))
    return Behavior(scenario=sc, tables=tables)
