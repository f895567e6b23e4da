"""Single-hidden-layer perceptron response surface with SCG training.

The network maps updating-parameter vectors to a scalar cost prediction:
tanh hidden units, linear output. Inputs are affinely scaled to [-1, 1]
from the parameter bounds; the target scaling is fixed at initialization
so that warm-started training keeps the meaning of the weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

log = logging.getLogger(__name__)


@dataclass
class SurrogateNet:
    """MLP weights plus the input/output affine scalings.

    w1 has shape (m_hidden, d_in + 1) with the hidden biases in the last
    column; w2 has shape (m_hidden + 1,) with the output bias last.
    """

    w1: np.ndarray
    w2: np.ndarray
    in_center: np.ndarray
    in_half: np.ndarray
    out_center: float = 0.0
    out_scale: float = 1.0

    def __post_init__(self):
        self.w1 = np.atleast_2d(np.asarray(self.w1, dtype=float))
        self.w2 = np.atleast_1d(np.asarray(self.w2, dtype=float))
        self.in_center = np.atleast_1d(np.asarray(self.in_center, dtype=float))
        self.in_half = np.atleast_1d(np.asarray(self.in_half, dtype=float))
        if self.w1.shape != (self.m_hidden, self.d_in + 1):
            raise ValueError("w1 shape inconsistent with w2/in_center")
        if self.w2.shape != (self.m_hidden + 1,):
            raise ValueError("w2 must hold one weight per hidden unit plus a bias")
        if self.in_center.shape != self.in_half.shape or self.in_center.size != self.d_in:
            raise ValueError("input scaling must match d_in")
        if not (np.all(np.isfinite(self.w1)) and np.all(np.isfinite(self.w2))):
            raise ValueError("weights must be finite")
        if np.any(self.in_half <= 0.0) or self.out_scale == 0.0:
            raise ValueError("scaling ranges must be non-zero")

    @property
    def d_in(self) -> int:
        return self.in_center.size if self.in_center.ndim else 1

    @property
    def m_hidden(self) -> int:
        return self.w2.size - 1

    @property
    def weight_count(self) -> int:
        return self.w1.size + self.w2.size

    def scale_inputs(self, x: np.ndarray) -> np.ndarray:
        return (x - self.in_center) / self.in_half

    def unscale_inputs(self, x_scaled: np.ndarray) -> np.ndarray:
        return x_scaled * self.in_half + self.in_center

    def flat_weights(self) -> np.ndarray:
        """All weights as one vector: w1 rows first, then w2."""
        return np.concatenate([self.w1.ravel(), self.w2])

    def with_flat_weights(self, w: np.ndarray) -> "SurrogateNet":
        n1 = self.w1.size
        return replace(self, w1=w[:n1].reshape(self.w1.shape).copy(),
                       w2=w[n1:].copy())


@dataclass
class TrainingSet:
    """Sampled parameter vectors and their cost values."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.targets = np.atleast_1d(np.asarray(self.targets, dtype=float))
        if self.inputs.shape[0] != self.targets.size:
            raise ValueError("inputs and targets must have matching rows")
        if self.targets.size < 1:
            raise ValueError("training set is empty")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.targets))):
            raise ValueError("training data must be finite")

    @property
    def n_samples(self) -> int:
        return self.targets.size


def _hidden(net: SurrogateNet, x_scaled: np.ndarray) -> np.ndarray:
    # x_scaled: (n, d) -> activations (n, m)
    return np.tanh(x_scaled @ net.w1[:, :-1].T + net.w1[:, -1])


def forward(net: SurrogateNet, x: np.ndarray) -> float | np.ndarray:
    """Network prediction in cost units.

    Accepts a single parameter vector (returns a float) or an (n, d_in)
    batch (returns an (n,) array).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single and x.size != net.d_in:
        raise ValueError(f"expected {net.d_in} inputs, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    xb = np.atleast_2d(x)
    z = _hidden(net, net.scale_inputs(xb))
    y = z @ net.w2[:-1] + net.w2[-1]
    y = y * net.out_scale + net.out_center
    return float(y[0]) if single else y


def loss(net: SurrogateNet, data: TrainingSet) -> float:
    """Sum-of-squares error of the net over the training set."""
    r = data.targets - forward(net, data.inputs)
    return float(r @ r)


def grad(net: SurrogateNet, data: TrainingSet) -> np.ndarray:
    """Exact backpropagation gradient of loss() w.r.t. the flat weights."""
    xs = net.scale_inputs(data.inputs)          # (n, d)
    z = _hidden(net, xs)                        # (n, m)
    y = (z @ net.w2[:-1] + net.w2[-1]) * net.out_scale + net.out_center
    r = data.targets - y                        # (n,)
    dy = -2.0 * r * net.out_scale               # dE/dy_scaled, (n,)
    g2 = np.concatenate([z.T @ dy, [dy.sum()]])
    da = np.outer(dy, net.w2[:-1]) * (1.0 - z**2)   # (n, m)
    g1 = np.column_stack([da.T @ xs, da.sum(axis=0)])
    return np.concatenate([g1.ravel(), g2])


def init_net(d_in: int, m_hidden: int, bounds, seed: int,
             target_center: float = 0.0, target_scale: float = 1.0,
             planned_samples: int | None = None) -> SurrogateNet:
    """Small random net with input scaling derived from parameter bounds.

    Weights are uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)]. `bounds` is
    anything with lower/upper arrays. When planned_samples is given, the
    total weight count must stay below it.
    """
    lower = np.asarray(bounds.lower, dtype=float)
    upper = np.asarray(bounds.upper, dtype=float)
    if lower.size != d_in:
        raise ValueError("bounds dimension must equal d_in")
    n_weights = m_hidden * (d_in + 1) + m_hidden + 1
    if planned_samples is not None and n_weights >= planned_samples:
        raise ValueError(
            f"{n_weights} weights need more than {planned_samples} training samples")
    rng = np.random.default_rng(seed)
    a1 = 1.0 / np.sqrt(d_in + 1)
    a2 = 1.0 / np.sqrt(m_hidden + 1)
    return SurrogateNet(
        w1=rng.uniform(-a1, a1, (m_hidden, d_in + 1)),
        w2=rng.uniform(-a2, a2, m_hidden + 1),
        in_center=0.5 * (lower + upper),
        in_half=0.5 * (upper - lower),
        out_center=float(target_center),
        out_scale=float(target_scale),
    )


def target_scaling(targets: np.ndarray) -> tuple[float, float]:
    """Zero-mean / unit-range affine parameters for a target sample."""
    t = np.asarray(targets, dtype=float)
    span = float(t.max() - t.min())
    return float(t.mean()), span if span > 0.0 else 1.0


def train(net: SurrogateNet, data: TrainingSet, cycles: int) -> SurrogateNet:
    """Scaled conjugate gradient training (Moller 1993), full batch.

    One cycle is one SCG iteration. Returns a new net holding the best
    weights seen; the loss never increases from first to last cycle. The
    input net is left untouched, so repeated calls warm-start naturally.
    """
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    if net.weight_count >= data.n_samples:
        raise ValueError(
            f"net has {net.weight_count} weights but only {data.n_samples} "
            "training samples; need weights < samples")

    work = net.with_flat_weights(net.flat_weights())

    def f(w):
        return loss(work.with_flat_weights(w), data)

    def df(w):
        return grad(work.with_flat_weights(w), data)

    w = net.flat_weights()
    n = w.size
    sigma0 = 1.0e-4
    lam = 1.0e-6
    lam_bar = 0.0
    e_w = f(w)
    g = df(w)
    r = -g
    p = r.copy()
    success = True
    best_w, best_e = w.copy(), e_w
    delta = 1.0
    p2 = float(p @ p)

    for k in range(1, cycles + 1):
        if success:
            p2 = float(p @ p)
            if p2 == 0.0 or not np.isfinite(p2):
                break
            sigma = sigma0 / np.sqrt(p2)
            s = (df(w + sigma * p) - g) / sigma
            delta = float(p @ s)
        delta += (lam - lam_bar) * p2
        if delta <= 0.0:  # make the Hessian estimate positive definite
            lam_bar = 2.0 * (lam - delta / p2)
            delta = -delta + lam * p2
            lam = lam_bar
        mu = float(p @ r)
        if mu <= 0.0:  # direction lost descent property: restart
            p = r.copy()
            mu = float(p @ r)
            if mu <= 0.0:
                break
            success = True
            continue
        alpha = mu / delta
        e_new = f(w + alpha * p)
        comp = 2.0 * delta * (e_w - e_new) / mu**2
        if comp >= 0.0 and np.isfinite(e_new):
            w = w + alpha * p
            e_w = e_new
            g = df(w)
            r_new = -g
            lam_bar = 0.0
            success = True
            if e_w < best_e:
                best_e, best_w = e_w, w.copy()
            if k % n == 0:
                p = r_new
            else:
                beta = float(r_new @ r_new - r_new @ r) / mu
                p = r_new + beta * p
            r = r_new
            if comp >= 0.75:
                lam = 0.25 * lam
        else:
            lam_bar = lam
            success = False
        if comp < 0.25:
            lam = lam + delta * (1.0 - comp) / p2
        if lam > 1.0e100:
            log.warning("SCG step damping diverged at cycle %d; "
                        "returning best-so-far weights", k)
            break
        if float(r @ r) < 1.0e-30:
            break

    return net.with_flat_weights(best_w)
