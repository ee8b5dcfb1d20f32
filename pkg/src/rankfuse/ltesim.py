"""Simulated ranked-page serving with learned ensemble weights.

A synthetic stand-in for an online list-serving system: discrete user
contexts, hidden per-context item utilities, and a handful of sub-model
scorers that each see the utilities through their own noise.  A policy
picks per-page ensemble weights, the weighted tournament aggregate
becomes the served page, and a cascade click model with position-biased
examination produces a binary conversion reward.

Three policies are provided: uniform-random expert weights (the cold
start), a greedy bandit over the expert sets, and the
evaluator/generator loop refit on a fixed page schedule (the warm
start).  ``report`` compares finished traces.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ego import EgoConfig, Sample, ego_fit
from .perm import Permutation, VoterProfile, kendall_tau
from .tournament import _greedy_order, _sign_tensor

__all__ = [
    "ExpertWeightSet",
    "PageRecord",
    "ReportRow",
    "SimEnvironment",
    "SimTrace",
    "default_environment",
    "default_expert_sets",
    "env_from_config",
    "env_to_config",
    "expected_page_reward",
    "read_env_json",
    "read_trace_csv",
    "report",
    "run_bandit",
    "run_cold_start",
    "run_warm_start",
    "sample_context",
    "samples_from_records",
    "serve_page",
    "trace_csv_text",
    "two_context_environment",
    "two_context_expert_sets",
    "write_env_json",
    "write_trace_csv",
]


@dataclass(frozen=True)
class ExpertWeightSet:
    """Hand-designed ensemble weight vectors over the sub-models."""

    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        vectors = tuple(tuple(float(x) for x in v) for v in self.vectors)
        object.__setattr__(self, "vectors", vectors)
        if not vectors:
            raise ValueError("need at least one weight vector")
        n = len(vectors[0])
        if n < 1:
            raise ValueError("weight vectors cannot be empty")
        for v in vectors:
            if len(v) != n:
                raise ValueError("all weight vectors must have the same length")
            arr = np.asarray(v)
            if np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-9:
                raise ValueError("each vector must be non-negative and sum to 1")

    @property
    def n(self) -> int:
        return len(self.vectors[0])

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, idx: int) -> tuple[float, ...]:
        return self.vectors[idx]


@dataclass(frozen=True)
class SimEnvironment:
    """Synthetic contextual serving environment.

    ``utilities[c][i]`` is item i's hidden conversion probability under
    context c, so values must sit in [0, 1].  Each sub-model scores the
    items as utility plus Gaussian noise at its own level, drawn once
    from ``seed`` at construction: the scorers (and hence each
    sub-model's ranking per context) are frozen functions of the
    environment, while page-level randomness comes from the serving RNG.
    ``examine[k]`` is the probability position k is looked at; a user
    converts on the first examined position whose item converts.
    """

    contexts: tuple[tuple[float, ...], ...]
    probabilities: tuple[float, ...]
    utilities: tuple[tuple[float, ...], ...]
    noise_levels: tuple[float, ...]
    examine: tuple[float, ...]
    seed: int
    _derived: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        contexts = tuple(tuple(float(x) for x in c) for c in self.contexts)
        probabilities = tuple(float(p) for p in self.probabilities)
        utilities = tuple(tuple(float(u) for u in row) for row in self.utilities)
        noise = tuple(float(s) for s in self.noise_levels)
        examine = tuple(float(e) for e in self.examine)
        for name, value in (
            ("contexts", contexts),
            ("probabilities", probabilities),
            ("utilities", utilities),
            ("noise_levels", noise),
            ("examine", examine),
        ):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "seed", int(self.seed))
        if not contexts:
            raise ValueError("need at least one context")
        width = len(contexts[0])
        if any(len(c) != width for c in contexts):
            raise ValueError("contexts must share a feature width")
        if len(set(contexts)) != len(contexts):
            raise ValueError("contexts must be distinct")
        if len(probabilities) != len(contexts):
            raise ValueError("one probability per context required")
        if any(p < 0 for p in probabilities) or abs(sum(probabilities) - 1.0) > 1e-9:
            raise ValueError("context probabilities must be non-negative and sum to 1")
        m = len(examine)
        if m < 2:
            raise ValueError("need at least two items")
        if len(utilities) != len(contexts):
            raise ValueError("one utility row per context required")
        for row in utilities:
            if len(row) != m:
                raise ValueError("utility rows must match the page size")
            arr = np.asarray(row)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                raise ValueError("utilities are conversion probabilities in [0, 1]")
        if not self.noise_levels:
            raise ValueError("need at least one sub-model")
        if any(not np.isfinite(s) or s < 0 for s in noise):
            raise ValueError("noise levels must be finite and non-negative")
        arr = np.asarray(examine)
        if np.any(arr < 0) or np.any(arr > 1) or np.any(np.diff(arr) > 0):
            raise ValueError("examination probabilities must be non-increasing in [0, 1]")
        object.__setattr__(self, "_derived", None)

    @property
    def m(self) -> int:
        return len(self.examine)

    @property
    def n(self) -> int:
        return len(self.noise_levels)

    def _tables(self) -> dict:
        if self._derived is None:
            index = {c: i for i, c in enumerate(self.contexts)}
            orders, signs = [], []
            for ci in range(len(self.contexts)):
                u = np.asarray(self.utilities[ci])
                rows = []
                for j, sigma in enumerate(self.noise_levels):
                    rng = np.random.default_rng([self.seed, ci, j])
                    score = u + sigma * rng.standard_normal(self.m)
                    rows.append(sorted(range(self.m), key=lambda i: (-score[i], i)))
                items = np.array(rows, dtype=np.int64)
                profile = VoterProfile.from_arrays(items, np.ones(len(rows)))
                orders.append(tuple(Permutation(tuple(map(int, r))) for r in rows))
                signs.append(_sign_tensor(profile))
            derived = {"index": index, "orders": tuple(orders), "signs": tuple(signs)}
            object.__setattr__(self, "_derived", derived)
        return self._derived

    def context_index(self, context: Sequence[float]) -> int:
        key = tuple(float(x) for x in context)
        try:
            return self._tables()["index"][key]
        except KeyError:
            raise ValueError(f"unknown context {key}") from None

    def submodel_orders(self, context: Sequence[float]) -> tuple[Permutation, ...]:
        """Each sub-model's fixed item ranking under this context."""
        return self._tables()["orders"][self.context_index(context)]


def sample_context(env: SimEnvironment, rng: np.random.Generator) -> tuple[float, ...]:
    idx = int(rng.choice(len(env.contexts), p=env.probabilities))
    return env.contexts[idx]


def _aggregate(
    env: SimEnvironment,
    ci: int,
    weights: np.ndarray,
    decay: Sequence[float] | None,
) -> Permutation:
    signs = env._tables()["signs"][ci]
    if decay is None:
        margin = np.tensordot(weights, signs, axes=1)
        return _greedy_order(env.m, lambda k: margin)
    gamma = np.asarray(list(decay), dtype=float)
    if gamma.shape != (env.n,):
        raise ValueError("one decay factor per sub-model required")
    if np.any(gamma <= 0.0) or np.any(gamma > 1.0):
        raise ValueError("decay factors must lie in (0, 1]")
    return _greedy_order(
        env.m, lambda k: np.tensordot(weights * gamma**k, signs, axes=1)
    )


def serve_page(
    env: SimEnvironment,
    context: Sequence[float],
    weights: Sequence[float],
    decay: Sequence[float] | None,
    rng: np.random.Generator,
) -> tuple[int, Permutation]:
    """Serve one page and sample the binary conversion.

    The sub-model rankings for the context are aggregated under the
    given weights (and optional positional decay); the cascade then
    examines position k with probability ``examine[k]`` and converts on
    the first examined item that passes its utility draw.  All 2m
    uniforms are drawn up front, so the RNG stream advances by the same
    amount whatever the outcome and raising any examination probability
    can only turn misses into conversions.
    """
    ci = env.context_index(context)
    w = np.asarray(weights, dtype=float)
    if w.shape != (env.n,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be a distribution over the sub-models")
    ranking = _aggregate(env, ci, w, decay)
    u_exam = rng.random(env.m)
    u_conv = rng.random(env.m)
    conv = env.utilities[ci]
    reward = 0
    for k, item in enumerate(ranking.items):
        if u_exam[k] < env.examine[k] and u_conv[k] < conv[item]:
            reward = 1
            break
    return reward, ranking


def expected_page_reward(
    env: SimEnvironment, context: Sequence[float], ranking: Permutation
) -> float:
    """Exact conversion probability of a fixed page under the cascade."""
    ci = env.context_index(context)
    conv = env.utilities[ci]
    miss = 1.0
    for k, item in enumerate(ranking.items):
        miss *= 1.0 - env.examine[k] * conv[item]
    return 1.0 - miss


# ---------------------------------------------------------------------------
# Traces and policies


@dataclass(frozen=True)
class PageRecord:
    page: int
    context: tuple[float, ...]
    policy: str
    weights: tuple[float, ...]
    reward: float
    ranking: Permutation
    decay: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SimTrace:
    """One policy's run: per-page records plus the logged training rows."""

    policy: str
    env: SimEnvironment
    records: tuple[PageRecord, ...]
    samples: tuple[Sample, ...]

    @property
    def mean_reward(self) -> float:
        return float(np.mean([r.reward for r in self.records]))


def _page_stream(base: int, page: int) -> np.random.Generator:
    return np.random.default_rng([base, 0, page])


def run_cold_start(
    env: SimEnvironment,
    experts: ExpertWeightSet,
    pages: int,
    rng: np.random.Generator,
    log_decay: bool = False,
) -> SimTrace:
    """Uniform-random expert weights per page; the exploration log.

    Labels are the conversion gap against the running mean conversion of
    the pages served so far, clipped to [-1, 1].  With ``log_decay`` the
    samples carry explicit all-ones decay columns so they can seed a
    decay-aware warm start.
    """
    if pages < 1:
        raise ValueError("pages must be at least 1")
    if experts.n != env.n:
        raise ValueError("expert vectors must cover the sub-models")
    base = int(rng.integers(2**62))
    choice_rng = np.random.default_rng([base, 1])
    ones = (1.0,) * env.n
    records, samples = [], []
    converted = 0
    for t in range(pages):
        page_rng = _page_stream(base, t)
        context = sample_context(env, page_rng)
        w = experts[int(choice_rng.integers(len(experts)))]
        reward, ranking = serve_page(env, context, w, None, page_rng)
        baseline = converted / t if t else 0.0
        label = float(np.clip(reward - baseline, -1.0, 1.0))
        samples.append(
            Sample(
                context=context,
                weights=w,
                label=label,
                decay=ones if log_decay else None,
            )
        )
        records.append(PageRecord(t, context, "ra-re", w, float(reward), ranking))
        converted += reward
    return SimTrace("ra-re", env, tuple(records), tuple(samples))


def run_bandit(
    env: SimEnvironment,
    experts: ExpertWeightSet,
    pages: int,
    rng: np.random.Generator,
) -> SimTrace:
    """Greedy selection by accumulated conversion rate, context-blind.

    Arm means carry an optimistic add-one prior — an unplayed arm counts
    as one phantom conversion from one phantom page — so the greedy rule
    tries every arm before settling instead of deadlocking on the
    all-zero tie.  Ties go to the lowest arm index.
    """
    if pages < 1:
        raise ValueError("pages must be at least 1")
    if experts.n != env.n:
        raise ValueError("expert vectors must cover the sub-models")
    base = int(rng.integers(2**62))
    wins = np.zeros(len(experts))
    pulls = np.zeros(len(experts))
    records, samples = [], []
    converted = 0
    for t in range(pages):
        page_rng = _page_stream(base, t)
        context = sample_context(env, page_rng)
        arm = int(np.argmax((1.0 + wins) / (1.0 + pulls)))
        w = experts[arm]
        reward, ranking = serve_page(env, context, w, None, page_rng)
        baseline = converted / t if t else 0.0
        label = float(np.clip(reward - baseline, -1.0, 1.0))
        samples.append(Sample(context=context, weights=w, label=label))
        records.append(PageRecord(t, context, "ra-be", w, float(reward), ranking))
        wins[arm] += reward
        pulls[arm] += 1
        converted += reward
    return SimTrace("ra-be", env, tuple(records), tuple(samples))


def run_warm_start(
    env: SimEnvironment,
    dataset: Sequence[Sample],
    pages: int,
    config: EgoConfig | None = None,
    rng: np.random.Generator | None = None,
    refresh: int = 1000,
) -> SimTrace:
    """Serve with the evaluator/generator policy, refit every ``refresh`` pages.

    The fit always sees the full log: the seed dataset plus everything
    served so far.  The trace's ``samples`` are exactly the ``pages``
    new rows, so the caller can extend its dataset with them.
    """
    if not dataset:
        raise ValueError("need a non-empty seed dataset")
    if pages < 1:
        raise ValueError("pages must be at least 1")
    if refresh < 1:
        raise ValueError("refresh must be at least 1")
    if config is None:
        config = EgoConfig()
    if rng is None:
        rng = np.random.default_rng(0)
    base = int(rng.integers(2**62))
    data = list(dataset)
    records, samples = [], []
    converted = 0
    policy = None
    for t in range(pages):
        if t % refresh == 0:
            fit_rng = np.random.default_rng([base, 2, t // refresh])
            policy = ego_fit(data, config, fit_rng)
        page_rng = _page_stream(base, t)
        context = sample_context(env, page_rng)
        w = tuple(float(x) for x in policy.weights(context))
        d = policy.decay(context)
        decay = None if d is None else tuple(float(x) for x in d)
        reward, ranking = serve_page(env, context, w, decay, page_rng)
        baseline = converted / t if t else 0.0
        label = float(np.clip(reward - baseline, -1.0, 1.0))
        sample = Sample(context=context, weights=w, label=label, decay=decay)
        data.append(sample)
        samples.append(sample)
        records.append(
            PageRecord(t, context, "ra-ego", w, float(reward), ranking, decay)
        )
        converted += reward
    return SimTrace("ra-ego", env, tuple(records), tuple(samples))


# ---------------------------------------------------------------------------
# Reporting


@dataclass(frozen=True)
class ReportRow:
    policy: str
    pages: int
    mean_reward: float
    improvement_pct: float
    ci_low: float
    ci_high: float
    ktd: tuple[float, ...]


def report(
    traces: Sequence[SimTrace],
    baseline: str | None = None,
    seed: int = 0,
    resamples: int = 1000,
) -> list[ReportRow]:
    """Compare finished traces from one environment.

    Per trace: mean reward, relative improvement against the named
    baseline trace (default: the first), a bootstrap 95% interval on the
    mean, and the mean pairwise-disagreement distance between the served
    pages and each sub-model's own ranking for the page's context.
    """
    if len(traces) < 2:
        raise ValueError("need at least two traces to compare")
    env = traces[0].env
    if any(t.env != env for t in traces[1:]):
        raise ValueError("traces come from mismatched environments")
    if baseline is None:
        base_trace = traces[0]
    else:
        matches = [t for t in traces if t.policy == baseline]
        if not matches:
            raise ValueError(f"no trace for baseline policy {baseline!r}")
        base_trace = matches[0]
    base_mean = base_trace.mean_reward
    rows = []
    for idx, trace in enumerate(traces):
        rewards = np.array([r.reward for r in trace.records])
        mean = float(rewards.mean())
        if mean == base_mean:
            improvement = 0.0
        elif base_mean == 0.0:
            improvement = float("inf") if mean > 0 else float("-inf")
        else:
            improvement = 100.0 * (mean - base_mean) / base_mean
        boot_rng = np.random.default_rng([seed, idx])
        draws = boot_rng.integers(rewards.size, size=(resamples, rewards.size))
        boot = rewards[draws].mean(axis=1)
        lo, hi = np.percentile(boot, [2.5, 97.5])
        ktd = np.zeros(env.n)
        for r in trace.records:
            for j, order in enumerate(env.submodel_orders(r.context)):
                ktd[j] += kendall_tau(r.ranking, order)
        ktd /= len(trace.records)
        rows.append(
            ReportRow(
                policy=trace.policy,
                pages=len(trace.records),
                mean_reward=mean,
                improvement_pct=improvement,
                ci_low=float(lo),
                ci_high=float(hi),
                ktd=tuple(float(v) for v in ktd),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Environment JSON config


def env_to_config(
    env: SimEnvironment, experts: ExpertWeightSet | None = None
) -> dict:
    config = {
        "format": 1,
        "contexts": [list(c) for c in env.contexts],
        "probabilities": list(env.probabilities),
        "utilities": [list(row) for row in env.utilities],
        "noise_levels": list(env.noise_levels),
        "examine": list(env.examine),
        "seed": env.seed,
    }
    if experts is not None:
        config["experts"] = [list(v) for v in experts.vectors]
    return config


def env_from_config(config: dict) -> tuple[SimEnvironment, ExpertWeightSet | None]:
    if config.get("format") != 1:
        raise ValueError("unsupported environment config format")
    contexts = tuple(tuple(c) for c in config["contexts"])
    if "utilities" in config:
        utilities = tuple(tuple(row) for row in config["utilities"])
    else:
        m = int(config["items"])
        utilities = _generated_utilities(
            int(config["utility_seed"]), len(contexts), m
        )
    env = SimEnvironment(
        contexts=contexts,
        probabilities=tuple(config["probabilities"]),
        utilities=utilities,
        noise_levels=tuple(config["noise_levels"]),
        examine=tuple(config["examine"]),
        seed=int(config["seed"]),
    )
    experts = None
    if "experts" in config:
        experts = ExpertWeightSet(tuple(tuple(v) for v in config["experts"]))
    return env, experts


def write_env_json(
    path: str, env: SimEnvironment, experts: ExpertWeightSet | None = None
) -> None:
    with open(path, "w") as fh:
        json.dump(env_to_config(env, experts), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_env_json(path: str) -> tuple[SimEnvironment, ExpertWeightSet | None]:
    with open(path) as fh:
        return env_from_config(json.load(fh))


def env_fingerprint(env: SimEnvironment) -> str:
    blob = json.dumps(env_to_config(env), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Trace CSV


def trace_csv_text(trace: SimTrace) -> str:
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["page", "context", "policy", "weights", "reward"])
    for r in trace.records:
        if r.decay is None:
            wcol = json.dumps(list(r.weights))
        else:
            wcol = json.dumps({"w": list(r.weights), "d": list(r.decay)})
        writer.writerow(
            [r.page, json.dumps(list(r.context)), r.policy, wcol, repr(r.reward)]
        )
    return buf.getvalue()


def write_trace_csv(trace: SimTrace, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(trace_csv_text(trace))


def read_trace_csv(path: str, env: SimEnvironment) -> SimTrace:
    """Rebuild a trace from its CSV, re-aggregating the served pages.

    The page permutations are not stored in the CSV; they are recomputed
    from the logged context and weights, which is exact because the
    aggregation is deterministic given the environment.  Training labels
    are not recoverable, so the rebuilt trace carries no samples.
    """
    import csv

    records = []
    policies = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["page", "context", "policy", "weights", "reward"]:
            raise ValueError(f"{path}: expected header page,context,policy,weights,reward")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ValueError(f"{path} line {lineno}: expected 5 fields")
            try:
                page = int(row[0])
                context = tuple(float(x) for x in json.loads(row[1]))
                policy = row[2]
                wdoc = json.loads(row[3])
                if isinstance(wdoc, dict):
                    weights = tuple(float(x) for x in wdoc["w"])
                    decay = tuple(float(x) for x in wdoc["d"])
                else:
                    weights, decay = tuple(float(x) for x in wdoc), None
                reward = float(row[4])
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
            ci = env.context_index(context)
            ranking = _aggregate(env, ci, np.asarray(weights), decay)
            policies.add(policy)
            records.append(
                PageRecord(page, context, policy, weights, reward, ranking, decay)
            )
    if not records:
        raise ValueError(f"{path}: no trace rows")
    if len(policies) != 1:
        raise ValueError(f"{path}: expected a single policy per trace file")
    return SimTrace(policies.pop(), env, tuple(records), ())


def samples_from_records(records: Sequence[PageRecord]) -> tuple[Sample, ...]:
    """Recompute training samples from served-page records.

    Applies the same labeling rule the serving policies use — reward
    minus the running mean conversion of the preceding pages, clipped to
    [-1, 1] — so the original run's labels are reproduced exactly.
    Decay columns are carried over from the records when present.
    """
    samples = []
    converted = 0.0
    for t, r in enumerate(records):
        baseline = converted / t if t else 0.0
        samples.append(
            Sample(
                context=r.context,
                weights=r.weights,
                label=float(np.clip(r.reward - baseline, -1.0, 1.0)),
                decay=r.decay,
            )
        )
        converted += r.reward
    return tuple(samples)


# ---------------------------------------------------------------------------
# Bundled environments


def _generated_utilities(
    seed: int, n_contexts: int, m: int
) -> tuple[tuple[float, ...], ...]:
    """Top-heavy random conversion probabilities, one row per context."""
    rows = []
    for ci in range(n_contexts):
        rng = np.random.default_rng([seed, ci])
        rows.append(tuple(float(u) for u in 0.6 * rng.random(m) ** 2))
    return tuple(rows)


def default_environment(seed: int = 0) -> SimEnvironment:
    """Four contexts (two binary features), ten items, five sub-models."""
    contexts = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
    m = 10
    return SimEnvironment(
        contexts=contexts,
        probabilities=(0.25, 0.25, 0.25, 0.25),
        utilities=_generated_utilities(seed, len(contexts), m),
        noise_levels=(0.1, 0.3, 0.5, 1.0, 2.0),
        examine=tuple(0.85**k for k in range(m)),
        seed=seed,
    )


def default_expert_sets() -> ExpertWeightSet:
    """Eight designed weight combinations over the five default sub-models."""
    return ExpertWeightSet(
        (
            (1.0, 0.0, 0.0, 0.0, 0.0),
            (0.0, 1.0, 0.0, 0.0, 0.0),
            (0.0, 0.0, 1.0, 0.0, 0.0),
            (0.0, 0.0, 0.0, 1.0, 0.0),
            (0.0, 0.0, 0.0, 0.0, 1.0),
            (0.2, 0.2, 0.2, 0.2, 0.2),
            (0.35, 0.25, 0.2, 0.15, 0.05),
            (0.05, 0.15, 0.2, 0.25, 0.35),
        )
    )


_TWO_CONTEXT_SCORER_SEED = 731

_TWO_CONTEXT_CONV = (0.6, 0.08, 0.05, 0.03, 0.02, 0.015, 0.01, 0.005)


def two_context_environment() -> SimEnvironment:
    """Two contexts with opposite item utilities; no single expert set is
    good in both.

    Conversion mass is concentrated on one golden item per context, so a
    page is only worth much when that item sits near the top.  The
    scorer seed is fixed so that the realized noise makes the first
    sub-model track the utilities well in the first context but not the
    second, and the second sub-model the reverse — the context-aware
    policy has something genuine to learn while the context-blind ones
    cannot have it both ways.
    """
    top_heavy = _TWO_CONTEXT_CONV
    return SimEnvironment(
        contexts=((0.0,), (1.0,)),
        probabilities=(0.5, 0.5),
        utilities=(top_heavy, tuple(reversed(top_heavy))),
        noise_levels=(0.35, 0.35, 0.8, 2.0),
        examine=tuple(0.6**k for k in range(len(top_heavy))),
        seed=_TWO_CONTEXT_SCORER_SEED,
    )


def two_context_expert_sets() -> ExpertWeightSet:
    """Eight designed weight combinations over the four two-context sub-models."""
    return ExpertWeightSet(
        (
            (1.0, 0.0, 0.0, 0.0),
            (0.0, 1.0, 0.0, 0.0),
            (0.0, 0.0, 1.0, 0.0),
            (0.0, 0.0, 0.0, 1.0),
            (0.25, 0.25, 0.25, 0.25),
            (0.5, 0.5, 0.0, 0.0),
            (0.6, 0.2, 0.1, 0.1),
            (0.2, 0.6, 0.1, 0.1),
        )
    )
