"""Evaluator/Generator optimization over ensemble weights.

A surrogate Evaluator scores (context, weights) pairs from logged
interaction outcomes; a paired random-distillation head measures how far
a query sits from the training data, giving an exploration bonus.  The
Generator is a small network trained by gradient ascent *through* the
frozen Evaluator to emit, per context, the weight vector maximizing
predicted reward plus bonus.  A tiny fixed reward landscape over the
3-simplex ("toy environment") exercises the whole loop end to end.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .neural import Adam, GradientTape, Mlp, backward, forward
from .perm import Permutation, VoterProfile
from .tournament import tournament_greedy

__all__ = [
    "EgoConfig",
    "EvaluatorBundle",
    "GeneratorPolicy",
    "Sample",
    "bonus",
    "ego_fit",
    "evaluator_loss",
    "merge_samples",
    "read_samples_csv",
    "run_toy_loop",
    "split_holdout",
    "toy_baseline",
    "toy_environment",
    "toy_targets",
    "toy_vertex_rewards",
    "train_evaluator",
    "train_generator",
    "write_samples_csv",
]

GAMMA_MIN = 0.05

EVALUATOR_HIDDEN = (64, 32)


@dataclass(frozen=True)
class Sample:
    """One logged interaction: context, served weights, outcome label.

    ``label`` is the reward gap against a baseline, in [-1, 1]; ``count``
    is how many raw interactions the row stands for.  ``decay`` carries
    the served per-voter decay factors when position decay is in play.
    """

    context: tuple[float, ...]
    weights: tuple[float, ...]
    label: float
    count: int = 1
    decay: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not -1.0 <= self.label <= 1.0:
            raise ValueError("label must lie in [-1, 1]")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")
        if self.decay is not None and len(self.decay) != len(self.weights):
            raise ValueError("one decay factor per weight required")

    def key(self) -> bytes:
        """Exact float identity of (context, weights, decay)."""
        parts = [
            np.asarray(self.context, dtype=float).tobytes(),
            np.asarray(self.weights, dtype=float).tobytes(),
        ]
        if self.decay is not None:
            parts.append(np.asarray(self.decay, dtype=float).tobytes())
        return b"|".join(parts)

    def encode(self) -> np.ndarray:
        """Evaluator input vector: context then weights then decay."""
        parts = [self.context, self.weights]
        if self.decay is not None:
            parts.append(self.decay)
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])


def merge_samples(samples: Sequence[Sample]) -> list[Sample]:
    """Collapse samples with identical keys: counts add, labels average.

    The label average is count-weighted, so merging is associative and
    insensitive to how the raw rows were batched.
    """
    order: list[bytes] = []
    acc: dict[bytes, list] = {}
    for s in samples:
        k = s.key()
        if k not in acc:
            order.append(k)
            acc[k] = [s, 0, 0.0]
        slot = acc[k]
        slot[1] += s.count
        slot[2] += s.count * s.label
    out = []
    for k in order:
        proto, count, weighted = acc[k]
        out.append(replace(proto, label=weighted / count, count=count))
    return out


def split_holdout(
    samples: Sequence[Sample], fraction: float = 0.1
) -> tuple[list[Sample], list[Sample]]:
    """Deterministic (train, heldout) split by hash bucket of the key.

    Falls back to using everything for both sides when either split
    would come out empty (tiny datasets).
    """
    buckets = max(int(round(1.0 / fraction)), 2)
    train, held = [], []
    for s in samples:
        digest = hashlib.sha256(s.key()).digest()
        bucket = int.from_bytes(digest[:8], "big") % buckets
        (held if bucket == 0 else train).append(s)
    if not train or not held:
        everything = list(samples)
        return everything, everything
    return train, held


# ---------------------------------------------------------------------------
# Evaluator


@dataclass
class EvaluatorBundle:
    """Reward head plus the random-distillation pair.

    ``reward`` maps an encoded (context, weights) vector to one logit.
    ``rnd`` is trained to imitate ``rnd_target``, whose parameters are
    never touched after initialization; their disagreement at a query
    point is the exploration bonus.
    """

    reward: Mlp
    rnd: Mlp
    rnd_target: Mlp
    heldout_ce: float | None = None

    @classmethod
    def init(
        cls,
        input_dim: int,
        rng: np.random.Generator,
        rnd_dim: int = 8,
        target_scale: tuple[float, float] = (3.0, 8.0),
    ) -> "EvaluatorBundle":
        """Fresh nets; the distillation target gets amplified weights.

        The inputs here live in a tiny, smooth box, so a target drawn at
        the ordinary initialization scale is easy to imitate everywhere
        and the novelty signal collapses.  Amplifying the first layer
        makes the frozen function vary quickly across the input box, so
        agreement stays local to the training data; amplifying the last
        layer raises the disagreement amplitude to the same order as the
        reward logits, keeping the exploration term meaningful.
        """
        freq, amp = target_scale
        sizes = (input_dim, *EVALUATOR_HIDDEN)
        target = Mlp.init((*sizes, rnd_dim), rng)
        target.weights[0] *= freq
        target.weights[-1] *= amp
        return cls(
            reward=Mlp.init((*sizes, 1), rng),
            rnd=Mlp.init((*sizes, rnd_dim), rng),
            rnd_target=target,
        )


def _softplus(z: float) -> float:
    return math.log1p(math.exp(-abs(z))) + max(z, 0.0)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def _sample_losses(bundle: EvaluatorBundle, s: Sample) -> tuple[float, float]:
    """(weighted cross-entropy, distillation MSE) for one sample."""
    x = s.encode()
    z = float(forward(bundle.reward, x)[0])
    y = 1.0 if s.label > 0 else 0.0
    wce = (_softplus(z) - y * z) * s.count * abs(s.label)
    diff = forward(bundle.rnd, x) - forward(bundle.rnd_target, x)
    return wce, float(np.mean(diff * diff))


def evaluator_loss(bundle: EvaluatorBundle, samples: Sequence[Sample]) -> float:
    """Sum of count-and-gap-weighted CE plus distillation MSE."""
    if not samples:
        raise ValueError("need a non-empty batch")
    total = 0.0
    for s in samples:
        wce, mse = _sample_losses(bundle, s)
        total += wce + mse
    return total


def bonus(
    bundle: EvaluatorBundle,
    context: Sequence[float],
    weights: Sequence[float],
    decay: Sequence[float] | None = None,
) -> float:
    """Squared distillation gap at the query point; 0 iff the nets agree."""
    parts = [context, weights] if decay is None else [context, weights, decay]
    x = np.concatenate([np.asarray(p, dtype=float) for p in parts])
    diff = forward(bundle.rnd, x) - forward(bundle.rnd_target, x)
    return float(diff @ diff)


def train_evaluator(
    bundle: EvaluatorBundle,
    dataset: Sequence[Sample],
    rng: np.random.Generator,
    updates: int = 300,
    batch_size: int = 32,
    lr: float = 1e-3,
    rnd_lr: float | None = None,
) -> EvaluatorBundle:
    """Mini-batch descent on the evaluator loss; the RND target is frozen.

    Runs a fixed number of updates (not epochs) so cost stays bounded on
    large datasets.  The distillation head defaults to a faster rate
    than the reward head because its target function has deliberately
    amplified outputs (see :meth:`EvaluatorBundle.init`).  The
    count-weighted CE on the held-out split lands in
    ``bundle.heldout_ce``.
    """
    if not dataset:
        raise ValueError("need a non-empty dataset")
    train, held = split_holdout(dataset)
    opt_reward = Adam(lr=lr)
    opt_rnd = Adam(lr=10.0 * lr if rnd_lr is None else rnd_lr)
    order: list[int] = []
    for _ in range(updates):
        batch = []
        for _ in range(min(batch_size, len(train))):
            if not order:
                order = list(rng.permutation(len(train)))
            batch.append(train[order.pop()])
        r_tape = None
        d_tape = None
        for s in batch:
            x = s.encode()
            z = float(forward(bundle.reward, x)[0])
            if not math.isfinite(z):
                raise ValueError("non-finite evaluator output; training aborted")
            y = 1.0 if s.label > 0 else 0.0
            up = (_sigmoid(z) - y) * s.count * abs(s.label)
            tape = backward(bundle.reward, x, [up])
            r_tape = _accumulate(r_tape, tape)
            out = forward(bundle.rnd, x)
            target = forward(bundle.rnd_target, x)
            tape = backward(bundle.rnd, x, 2.0 * (out - target) / out.size)
            d_tape = _accumulate(d_tape, tape)
        _scale(r_tape, 1.0 / len(batch))
        _scale(d_tape, 1.0 / len(batch))
        opt_reward.step(bundle.reward, r_tape)
        opt_rnd.step(bundle.rnd, d_tape)
    ce = 0.0
    for s in held:
        wce, _ = _sample_losses(bundle, s)
        ce += wce
    bundle.heldout_ce = ce / len(held)
    return bundle


def _accumulate(total: GradientTape | None, tape: GradientTape) -> GradientTape:
    if total is None:
        return tape
    for a, b in zip(total.d_weights, tape.d_weights):
        a += b
    for a, b in zip(total.d_biases, tape.d_biases):
        a += b
    total.d_input += tape.d_input
    return total


def _scale(tape: GradientTape, factor: float) -> None:
    for arr in (*tape.d_weights, *tape.d_biases):
        arr *= factor
    tape.d_input *= factor


# ---------------------------------------------------------------------------
# Generator


def _softmax(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max())
    return e / e.sum()


@dataclass
class GeneratorPolicy:
    """Context-to-weights network with an exploration appetite.

    Raw scores map to the simplex through normalized exponentials; the
    optional second head maps through a logistic squashed into
    (GAMMA_MIN, 1] for per-voter position decay.
    """

    net: Mlp
    n: int
    alpha: float = 1.0
    with_decay: bool = False

    @classmethod
    def init(
        cls,
        context_dim: int,
        n: int,
        rng: np.random.Generator,
        alpha: float = 1.0,
        with_decay: bool = False,
    ) -> "GeneratorPolicy":
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        out = 2 * n if with_decay else n
        net = Mlp.init((max(context_dim, 1), *EVALUATOR_HIDDEN, out), rng)
        return cls(net=net, n=n, alpha=alpha, with_decay=with_decay)

    def raw(self, context: Sequence[float]) -> np.ndarray:
        return forward(self.net, context)

    def weights(self, context: Sequence[float]) -> np.ndarray:
        return _softmax(self.raw(context)[: self.n])

    def decay(self, context: Sequence[float]) -> np.ndarray | None:
        if not self.with_decay:
            return None
        raw = self.raw(context)[self.n :]
        sig = np.array([_sigmoid(float(r)) for r in raw])
        return GAMMA_MIN + (1.0 - GAMMA_MIN) * sig


def train_generator(
    policy: GeneratorPolicy,
    bundle: EvaluatorBundle,
    contexts: Sequence[Sequence[float]],
    steps: int = 200,
    lr: float = 0.05,
) -> GeneratorPolicy:
    """Ascend predicted reward plus alpha * bonus, through frozen nets.

    Gradients flow from the evaluator's input back into the generator's
    parameters only; the evaluator and both RND nets are read, never
    stepped.
    """
    if not contexts:
        raise ValueError("need at least one context")
    ctxs = [np.asarray(c, dtype=float) for c in contexts]
    opt = Adam(lr=lr)
    n = policy.n
    for _ in range(steps):
        total: GradientTape | None = None
        for c in ctxs:
            raw = forward(policy.net, c)
            w = _softmax(raw[:n])
            parts = [c, w]
            if policy.with_decay:
                sig = np.array([_sigmoid(float(r)) for r in raw[n:]])
                parts.append(GAMMA_MIN + (1.0 - GAMMA_MIN) * sig)
            x = np.concatenate(parts)
            # d(reward)/dx through the frozen reward head
            u = backward(bundle.reward, x, [1.0]).d_input.copy()
            if policy.alpha > 0:
                diff = forward(bundle.rnd, x) - forward(bundle.rnd_target, x)
                up = 2.0 * policy.alpha * diff
                u += backward(bundle.rnd, x, up).d_input
                u -= backward(bundle.rnd_target, x, up).d_input
            if not np.all(np.isfinite(u)):
                raise ValueError("non-finite generator objective; training aborted")
            u_w = u[len(c) : len(c) + n]
            # simplex head Jacobian
            up_raw = np.empty_like(raw)
            up_raw[:n] = w * (u_w - float(u_w @ w))
            if policy.with_decay:
                u_d = u[len(c) + n :]
                up_raw[n:] = u_d * (1.0 - GAMMA_MIN) * sig * (1.0 - sig)
            # descent on the negated objective
            tape = backward(policy.net, c, -up_raw)
            total = _accumulate(total, tape)
        _scale(total, 1.0 / len(ctxs))
        opt.step(policy.net, total)
    return policy


# ---------------------------------------------------------------------------
# End-to-end fit


@dataclass(frozen=True)
class EgoConfig:
    """Knobs for one evaluator+generator fit."""

    alpha: float = 1.0
    rnd_dim: int = 8
    with_decay: bool = False
    evaluator_updates: int = 300
    batch_size: int = 32
    evaluator_lr: float = 1e-3
    rnd_lr: float | None = None
    generator_steps: int = 200
    generator_lr: float = 0.05


def ego_fit(
    dataset: Sequence[Sample], config: EgoConfig, rng: np.random.Generator
) -> GeneratorPolicy:
    """Merge the log, train the evaluator, then train the generator."""
    if not dataset:
        raise ValueError("need a non-empty dataset")
    merged = merge_samples(dataset)
    ctx_dim = len(merged[0].context)
    n = len(merged[0].weights)
    has_decay = merged[0].decay is not None
    for s in merged:
        if len(s.context) != ctx_dim or len(s.weights) != n:
            raise ValueError("samples disagree on context or weight sizes")
        if (s.decay is not None) != has_decay:
            raise ValueError("samples disagree on decay presence")
    if config.with_decay and not has_decay:
        raise ValueError("config asks for decay but samples carry none")
    input_dim = ctx_dim + n + (n if has_decay else 0)
    bundle = EvaluatorBundle.init(
        input_dim, np.random.default_rng(rng.integers(2**63)), config.rnd_dim
    )
    train_evaluator(
        bundle,
        merged,
        np.random.default_rng(rng.integers(2**63)),
        updates=config.evaluator_updates,
        batch_size=config.batch_size,
        lr=config.evaluator_lr,
        rnd_lr=config.rnd_lr,
    )
    contexts = list(dict.fromkeys(s.context for s in merged))
    policy = GeneratorPolicy.init(
        ctx_dim,
        n,
        np.random.default_rng(rng.integers(2**63)),
        alpha=config.alpha,
        with_decay=config.with_decay,
    )
    return train_generator(
        policy,
        bundle,
        contexts,
        steps=config.generator_steps,
        lr=config.generator_lr,
    )


# ---------------------------------------------------------------------------
# Sample CSV round-trip


def write_samples_csv(samples: Sequence[Sample], path: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["context_json", "weights", "label", "count"])
        for s in samples:
            if s.decay is None:
                wcol = json.dumps(list(s.weights))
            else:
                wcol = json.dumps({"w": list(s.weights), "d": list(s.decay)})
            writer.writerow(
                [json.dumps(list(s.context)), wcol, repr(s.label), s.count]
            )


def read_samples_csv(path: str) -> list[Sample]:
    import csv

    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["context_json", "weights", "label", "count"]:
            raise ValueError(f"{path}: expected header context_json,weights,label,count")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path} line {lineno}: expected 4 fields")
            try:
                context = tuple(float(v) for v in json.loads(row[0]))
                wdoc = json.loads(row[1])
                if isinstance(wdoc, dict):
                    weights = tuple(float(v) for v in wdoc["w"])
                    decay = tuple(float(v) for v in wdoc["d"])
                else:
                    weights, decay = tuple(float(v) for v in wdoc), None
                out.append(
                    Sample(
                        context=context,
                        weights=weights,
                        label=float(row[2]),
                        count=int(row[3]),
                        decay=decay,
                    )
                )
            except (ValueError, KeyError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# Toy reward landscape


toy_vertex_rewards = (0.3, 0.6, 0.4)

_TOY_GRID = 200

_toy_cache: dict | None = None


def toy_targets() -> tuple[Permutation, Permutation, Permutation]:
    """The three fixed voter permutations behind the toy landscape."""
    return _toy_fixture()["targets"]


def toy_baseline() -> float:
    """Reference conversion level for toy labels: mean vertex reward."""
    return sum(toy_vertex_rewards) / 3.0


def _toy_aggregate(weights: np.ndarray) -> Permutation:
    targets = _toy_fixture()["targets"]
    items = np.array([t.items for t in targets])
    return tournament_greedy(VoterProfile.from_arrays(items, weights))


def _toy_fixture() -> dict:
    global _toy_cache
    if _toy_cache is not None:
        return _toy_cache
    rng = np.random.default_rng(0)
    targets: list[Permutation] = []
    while len(targets) < 3:
        p = Permutation(tuple(int(v) for v in rng.permutation(5)))
        if p not in targets:
            targets.append(p)
    items = np.array([t.items for t in targets])
    counts: dict[Permutation, int] = {}
    ticks = np.linspace(0.0, 1.0, _TOY_GRID)
    for x in ticks:
        for y in ticks:
            z = 1.0 - x - y
            if z < -1e-12:
                continue
            w = np.array([x, y, max(z, 0.0)])
            out = tournament_greedy(VoterProfile.from_arrays(items, w))
            counts[out] = counts.get(out, 0) + 1
    rewards: dict[Permutation, float] = {}
    for t, r in zip(targets, toy_vertex_rewards):
        rewards[t] = r
    off_vertex = [p for p in counts if p not in rewards]
    if not off_vertex:
        raise RuntimeError("toy landscape degenerate: no off-vertex region")
    best = max(off_vertex, key=lambda p: (counts[p], p.items))
    rewards[best] = 1.0
    for p in sorted(off_vertex, key=lambda q: q.items):
        if p != best:
            rewards[p] = float(rng.uniform(0.05, 0.55))
    _toy_cache = {"targets": tuple(targets), "rewards": rewards, "peak": best}
    return _toy_cache


def toy_environment(weights: Sequence[float]) -> float:
    """Reward of the aggregate served with these 3-simplex weights.

    Piecewise constant: the reward depends only on which permutation the
    weights produce.  Permutations outside the fixture table (possible
    only off the generating grid) fall back to the table floor 0.05.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (3,) or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must lie on the 3-simplex")
    w = np.clip(w, 0.0, None)
    out = _toy_aggregate(w)
    return _toy_fixture()["rewards"].get(out, 0.05)


def run_toy_loop(
    alpha: float,
    rounds: int = 20,
    rng: np.random.Generator | None = None,
    config: EgoConfig | None = None,
) -> list[tuple[tuple[float, ...], float]]:
    """Interactive loop on the toy landscape, seeded with the vertices.

    Each round refits the evaluator and generator on everything seen so
    far, queries the landscape at the generated weights, and logs the
    outcome.  Returns the (weights, reward) trace, one entry per round.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if config is None:
        config = EgoConfig(
            alpha=alpha, evaluator_updates=120, rnd_lr=3e-2, generator_steps=150
        )
    else:
        config = replace(config, alpha=alpha)
    base = toy_baseline()
    vertices = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    data = [
        Sample(
            context=(1.0,),
            weights=v,
            label=float(np.clip(toy_environment(v) - base, -1.0, 1.0)),
        )
        for v in vertices
    ]
    trace: list[tuple[tuple[float, ...], float]] = []
    for _ in range(rounds):
        policy = ego_fit(data, config, rng)
        w = tuple(float(v) for v in policy.weights((1.0,)))
        reward = toy_environment(w)
        data.append(
            Sample(
                context=(1.0,),
                weights=w,
                label=float(np.clip(reward - base, -1.0, 1.0)),
            )
        )
        trace.append((w, reward))
    return trace
