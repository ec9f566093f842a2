"""Dense scalar-output MLP with reverse-mode gradients.

Supports gradients of the score with respect to inputs and parameters, and a
second-order pass giving parameter gradients of squared input-gradient norms
(the quantity every Lipschitz penalty differentiates). All passes are batched
numpy matrix ops with a fixed reduction order, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .rng import Rng


class ActivationError(ValueError):
    pass


def _act_fns(name: str, slope: float):
    """Return (act, act', act'') as elementwise numpy functions."""
    if name == "relu":
        return (lambda z: np.maximum(z, 0.0),
                lambda z: (z > 0).astype(float),  # subgradient at 0 taken as 0
                lambda z: np.zeros_like(z))
    if name == "leaky_relu":
        s = float(slope)
        return (lambda z: np.where(z > 0, z, s * z),
                lambda z: np.where(z > 0, 1.0, s),
                lambda z: np.zeros_like(z))
    if name == "tanh":
        def d2(z):
            a = np.tanh(z)
            return -2.0 * a * (1.0 - a * a)
        return (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2, d2)
    if name == "swish":
        def d1(z):
            s = expit(z)
            return s + z * s * (1.0 - s)

        def d2(z):
            s = expit(z)
            ds = s * (1.0 - s)
            return 2.0 * ds + z * ds * (1.0 - 2.0 * s)
        return (lambda z: z * expit(z), d1, d2)
    raise ActivationError(f"unknown activation {name!r}")


@dataclass
class MlpDiscriminator:
    """Feed-forward net: widths[0] inputs -> hidden layers -> scalar score.

    weights[l] has shape (widths[l+1], widths[l]); biases[l] shape (widths[l+1],).
    """

    widths: list
    activation: str
    weights: list
    biases: list
    slope: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if len(self.widths) < 2 or self.widths[-1] != 1:
            raise ValueError("widths must end with an output width of 1")
        _act_fns(self.activation, self.slope)  # validates the tag

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "MlpDiscriminator":
        return MlpDiscriminator(
            widths=list(self.widths), activation=self.activation,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            slope=self.slope, seed=self.seed)

    # ---- forward / first-order gradients -------------------------------

    def _check_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.input_dim:
            raise ValueError(
                f"dimension mismatch: net expects {self.input_dim}, got {x.shape[1]}")
        return x, squeeze

    def _forward_cache(self, x: np.ndarray):
        act, _, _ = _act_fns(self.activation, self.slope)
        a = x
        zs, acts = [], [x]
        for l in range(self.num_layers):
            z = a @ self.weights[l].T + self.biases[l]
            zs.append(z)
            a = act(z) if l < self.num_layers - 1 else z
            acts.append(a)
        return zs, acts

    def forward(self, x):
        """Scalar score(s); accepts one point or a (B, d) batch."""
        x, squeeze = self._check_batch(x)
        _, acts = self._forward_cache(x)
        out = acts[-1][:, 0]
        return float(out[0]) if squeeze else out

    def grad_input(self, x):
        """Gradient of the score w.r.t. the input point(s)."""
        x, squeeze = self._check_batch(x)
        _, dact, _ = _act_fns(self.activation, self.slope)
        zs, _ = self._forward_cache(x)
        delta = np.ones((x.shape[0], 1))
        for l in range(self.num_layers - 1, 0, -1):
            delta = (delta @ self.weights[l]) * dact(zs[l - 1])
        g = delta @ self.weights[0]
        return g[0] if squeeze else g

    def grad_params(self, x, upstream):
        """Sum over the batch of upstream_i * d score(x_i) / d params.

        Returns (dweights, dbiases) lists shaped like the parameters.
        """
        x, _ = self._check_batch(x)
        upstream = np.atleast_1d(np.asarray(upstream, dtype=float))
        if upstream.shape != (x.shape[0],):
            raise ValueError("one upstream scalar per batch point required")
        _, dact, _ = _act_fns(self.activation, self.slope)
        zs, acts = self._forward_cache(x)
        dws = [np.zeros_like(w) for w in self.weights]
        dbs = [np.zeros_like(b) for b in self.biases]
        dz = upstream[:, None]
        for l in range(self.num_layers - 1, -1, -1):
            dws[l] += dz.T @ acts[l]
            dbs[l] += dz.sum(axis=0)
            if l > 0:
                dz = (dz @ self.weights[l]) * dact(zs[l - 1])
        return dws, dbs

    # ---- second-order: parameter gradients of ||grad_input||^2 ---------

    def sqnorm_penalty_grads(self, x, coeffs):
        """Parameter gradients of sum_i coeffs_i * ||grad_input(x_i)||^2.

        Differentiates the composed forward-backward computation, so the
        activation's second derivative enters for smooth activations.
        Returns (sqnorms, dweights, dbiases) with sqnorms the per-point
        squared gradient norms.
        """
        x, _ = self._check_batch(x)
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if coeffs.shape != (x.shape[0],):
            raise ValueError("one coefficient per batch point required")
        _, dact, d2act = _act_fns(self.activation, self.slope)
        zs, acts = self._forward_cache(x)
        L = self.num_layers

        # input gradient g_i (reverse pass, cached per layer)
        deltas = [None] * (L + 1)
        delta = np.ones((x.shape[0], 1))
        deltas[L] = delta
        for l in range(L - 1, 0, -1):
            delta = (delta @ self.weights[l]) * dact(zs[l - 1])
            deltas[l] = delta
        g = delta @ self.weights[0]
        sqnorms = np.einsum("ij,ij->i", g, g)

        # tangent forward pass along v_i = 2 * coeffs_i * g_i (held constant)
        v = 2.0 * coeffs[:, None] * g
        tas = [v]
        tzs = []
        ta = v
        for l in range(L):
            tz = ta @ self.weights[l].T
            tzs.append(tz)
            ta = dact(zs[l]) * tz if l < L - 1 else tz
            tas.append(ta)

        # reverse pass over the (forward + tangent) computation
        dws = [np.zeros_like(w) for w in self.weights]
        dbs = [np.zeros_like(b) for b in self.biases]
        a_tz = np.ones((x.shape[0], 1))
        a_z = np.zeros((x.shape[0], 1))
        for l in range(L - 1, -1, -1):
            dws[l] += a_tz.T @ tas[l] + a_z.T @ acts[l]
            dbs[l] += a_z.sum(axis=0)
            if l > 0:
                a_ta = a_tz @ self.weights[l]
                a_a = a_z @ self.weights[l]
                z_prev = zs[l - 1]
                a_z = dact(z_prev) * a_a + d2act(z_prev) * tzs[l - 1] * a_ta
                a_tz = dact(z_prev) * a_ta
        return sqnorms, dws, dbs


def init(widths, activation: str, scheme: str, rng: Rng,
         slope: float = 0.2) -> MlpDiscriminator:
    """Random network with fan-in scaled weights and zero biases."""
    widths = list(int(w) for w in widths)
    if len(widths) < 2:
        raise ValueError("widths must list at least input and output sizes")
    if scheme not in ("he", "xavier"):
        raise ValueError(f"unknown init scheme {scheme!r}")
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        if scheme == "he":
            std = np.sqrt(2.0 / fan_in)
        else:
            std = np.sqrt(2.0 / (fan_in + fan_out))
        weights.append(rng.normal(scale=std, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpDiscriminator(widths=widths, activation=activation,
                            weights=weights, biases=biases, slope=slope,
                            seed=rng.seed)


def affine_net(w, b: float = 0.0) -> MlpDiscriminator:
    """Single-layer net computing <w, x> + b; handy for exact checks."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    return MlpDiscriminator(widths=[w.size, 1], activation="relu",
                            weights=[w[None, :].copy()],
                            biases=[np.array([float(b)])])


# ---- optimizer ----------------------------------------------------------


@dataclass
class AdamState:
    step: int = 0
    m_w: list = field(default_factory=list)
    v_w: list = field(default_factory=list)
    m_b: list = field(default_factory=list)
    v_b: list = field(default_factory=list)

    @staticmethod
    def for_net(net: MlpDiscriminator) -> "AdamState":
        return AdamState(
            m_w=[np.zeros_like(w) for w in net.weights],
            v_w=[np.zeros_like(w) for w in net.weights],
            m_b=[np.zeros_like(b) for b in net.biases],
            v_b=[np.zeros_like(b) for b in net.biases])


def adam_step(net: MlpDiscriminator, grads, state: AdamState,
              lr: float = 1e-3, beta1: float = 0.0, beta2: float = 0.9,
              eps: float = 1e-8):
    """One Adam update with bias correction, in place on a copied net.

    grads is a (dweights, dbiases) pair shaped like the parameters.
    Returns (updated net, updated state).
    """
    dws, dbs = grads
    if len(dws) != net.num_layers or len(dbs) != net.num_layers:
        raise ValueError("gradient shape mismatch")
    for dw, w in zip(dws, net.weights):
        if dw.shape != w.shape:
            raise ValueError("gradient shape mismatch")
    out = net.copy()
    t = state.step + 1
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for l in range(net.num_layers):
        for g, p, m, v in ((dws[l], out.weights[l], state.m_w[l], state.v_w[l]),
                           (dbs[l], out.biases[l], state.m_b[l], state.v_b[l])):
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    state.step = t
    return out, state


def add_grads(a, b, scale: float = 1.0):
    """Elementwise a + scale*b for (dweights, dbiases) pairs."""
    return ([x + scale * y for x, y in zip(a[0], b[0])],
            [x + scale * y for x, y in zip(a[1], b[1])])


def zero_grads(net: MlpDiscriminator):
    return ([np.zeros_like(w) for w in net.weights],
            [np.zeros_like(b) for b in net.biases])


# ---- checkpoint format ---------------------------------------------------

CHECKPOINT_MAGIC = "lipflow-mlp-v1"


def save_checkpoint(net: MlpDiscriminator, path):
    """Text checkpoint: header (widths, activation, slope, seed) + row-major floats."""
    with open(path, "w") as fh:
        fh.write(f"{CHECKPOINT_MAGIC}\n")
        fh.write(" ".join(str(w) for w in net.widths) + "\n")
        fh.write(f"{net.activation} {net.slope!r} {net.seed}\n")
        flat = np.concatenate(
            [w.ravel() for w in net.weights] + [b.ravel() for b in net.biases])
        fh.write(" ".join(repr(float(v)) for v in flat) + "\n")


def load_checkpoint(path) -> MlpDiscriminator:
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a checkpoint file: bad header {magic!r}")
        widths = [int(w) for w in fh.readline().split()]
        act, slope, seed = fh.readline().split()
        flat = np.array([float(v) for v in fh.readline().split()])
    weights, biases = [], []
    pos = 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(flat[pos:pos + fan_in * fan_out].reshape(fan_out, fan_in))
        pos += fan_in * fan_out
    for fan_out in widths[1:]:
        biases.append(flat[pos:pos + fan_out].copy())
        pos += fan_out
    if pos != flat.size:
        raise ValueError("checkpoint parameter count mismatch")
    return MlpDiscriminator(widths=widths, activation=act, weights=weights,
                            biases=biases, slope=float(slope), seed=int(seed))
