"""Fully-connected ReLU networks as piecewise affine functions.

A scalar-output network ``h(x) = omega . z_L(x) + phi`` is analyzed through
*activation indicators*: one 0/1 bit per hidden neuron.  Fixing an
indicator selects a single affine piece ``w.x + b`` together with the
polyhedral region of inputs on which the network actually realizes that
activation pattern.

The per-neuron constraint rows are the neuron's pre-activation expressed as
an affine function of the input, obtained by pulling the (unmasked) weight
row back through the masked affine maps of the earlier layers.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import (CombinatorialBlowup, DimensionMismatch, MissingField,
                     ProblemFormatError)
from .geometry import Polyhedron


@dataclass(frozen=True)
class ActivationIndicator:
    """One 0/1 entry per hidden neuron, grouped by layer."""

    bits: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "bits",
                           tuple(tuple(int(v) for v in layer) for layer in self.bits))
        for layer in self.bits:
            for v in layer:
                if v not in (0, 1):
                    raise ValueError(f"indicator entries must be 0/1, got {v}")

    def key(self) -> tuple[int, ...]:
        """Flattened layer-major bit tuple; the canonical sort key."""
        return tuple(v for layer in self.bits for v in layer)

    def compact(self) -> str:
        """Human-readable form, layers joined by '.': e.g. '1010' or '10.01'."""
        return ".".join("".join(str(v) for v in layer) for layer in self.bits)

    def __str__(self):
        return f"<{self.compact()}>"


@dataclass(frozen=True)
class CandidateIndicator:
    """Like an indicator but with -1 marking undetermined neurons."""

    bits: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "bits",
                           tuple(tuple(int(v) for v in layer) for layer in self.bits))
        for layer in self.bits:
            for v in layer:
                if v not in (-1, 0, 1):
                    raise ValueError(f"candidate entries must be -1/0/1, got {v}")

    @property
    def num_unknown(self) -> int:
        return sum(v == -1 for layer in self.bits for v in layer)

    def is_complete(self) -> bool:
        return self.num_unknown == 0


@dataclass(frozen=True)
class RegionAffine:
    """The affine piece ``h(x) = w.x + b`` selected by an indicator."""

    w: np.ndarray
    b: float
    indicator: ActivationIndicator


class ReluNetwork:
    """Immutable scalar-output ReLU network.

    weights[i] has shape (M_i, M_{i-1}) with one row per neuron;
    output_weights has shape (M_L,).
    """

    def __init__(self, weights, biases, output_weights, output_bias):
        self.weights = [np.atleast_2d(np.asarray(w, dtype=float)) for w in weights]
        self.biases = [np.atleast_1d(np.asarray(b, dtype=float)) for b in biases]
        self.output_weights = np.atleast_1d(np.asarray(output_weights, dtype=float))
        self.output_bias = float(output_bias)
        if len(self.weights) == 0:
            raise ProblemFormatError("network needs at least one hidden layer")
        if len(self.weights) != len(self.biases):
            raise ProblemFormatError("weights/biases layer count mismatch")
        prev = self.weights[0].shape[1]
        self.input_dim = prev
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[1] != prev:
                raise DimensionMismatch(
                    f"layer {i}: expected {prev} inputs, weight matrix has {w.shape[1]}")
            if b.shape[0] != w.shape[0]:
                raise DimensionMismatch(f"layer {i}: bias length {b.shape[0]} vs "
                                        f"{w.shape[0]} neurons")
            prev = w.shape[0]
        if self.output_weights.shape[0] != prev:
            raise DimensionMismatch("output weight length does not match last layer")
        for arr in (*self.weights, *self.biases, self.output_weights):
            if not np.all(np.isfinite(arr)):
                raise ProblemFormatError("network parameters must be finite")

    # -- basic structure ---------------------------------------------------

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple(w.shape[0] for w in self.weights)

    @property
    def num_neurons(self) -> int:
        return sum(self.layer_sizes)

    def _check_indicator(self, ind):
        if tuple(len(layer) for layer in ind.bits) != self.layer_sizes:
            raise DimensionMismatch(f"indicator layout {ind.bits} does not match "
                                    f"layer sizes {self.layer_sizes}")

    # -- evaluation ----------------------------------------------------------

    def forward(self, x) -> float:
        """h(x) for a single point."""
        z = np.asarray(x, dtype=float)
        if z.shape != (self.input_dim,):
            raise DimensionMismatch(f"input shape {z.shape}, expected ({self.input_dim},)")
        for w, b in zip(self.weights, self.biases):
            z = np.maximum(w @ z + b, 0.0)
        return float(self.output_weights @ z + self.output_bias)

    def forward_many(self, xs) -> np.ndarray:
        """h over rows of xs, shape (m, n) -> (m,)."""
        z = np.asarray(xs, dtype=float)
        for w, b in zip(self.weights, self.biases):
            z = np.maximum(z @ w.T + b, 0.0)
        return z @ self.output_weights + self.output_bias

    def preactivations(self, x) -> list[np.ndarray]:
        """Per-layer pre-activation vectors at x."""
        z = np.asarray(x, dtype=float)
        out = []
        for w, b in zip(self.weights, self.biases):
            pre = w @ z + b
            out.append(pre)
            z = np.maximum(pre, 0.0)
        return out

    # -- the affine piece of one indicator ------------------------------------

    def _affine_pass(self, ind: ActivationIndicator):
        """Pull every neuron's pre-activation back to input space under ind.

        Returns (rows, consts, wbar, bbar): rows[i] is (M_i, n) of unmasked
        pullback rows, consts[i] the matching offsets; wbar/bbar describe the
        masked affine image of the last hidden layer.
        """
        self._check_indicator(ind)
        n = self.input_dim
        wbar = np.eye(n)          # (n, M_prev), columns = masked pullbacks
        bbar = np.zeros(n)
        rows, consts = [], []
        for w, b, layer_bits in zip(self.weights, self.biases, ind.bits):
            mask = np.asarray(layer_bits, dtype=float)
            a = w @ wbar.T                       # (M_i, n) unmasked pullback rows
            c = w @ bbar + b                     # (M_i,)
            rows.append(a)
            consts.append(c)
            wbar = a.T * mask                    # zero the inactive columns
            bbar = c * mask
        return rows, consts, wbar, bbar

    def affine_map(self, ind: ActivationIndicator) -> RegionAffine:
        """The affine function the network computes on the region of ind."""
        _, _, wbar, bbar = self._affine_pass(ind)
        w = wbar @ self.output_weights
        b = float(self.output_weights @ bbar + self.output_bias)
        return RegionAffine(w=w, b=b, indicator=ind)

    def region_constraints(self, ind: ActivationIndicator) -> Polyhedron:
        """The polyhedron on which the network realizes ind.

        One row per neuron in layer order: active neurons contribute
        ``-a.x <= c`` (pre-activation >= 0), inactive ones ``a.x <= -c``.
        Duplicate rows are kept; redundancy removal is a separate concern.
        """
        rows, consts, _, _ = self._affine_pass(ind)
        a_rows, d_vals = [], []
        for a, c, layer_bits in zip(rows, consts, ind.bits):
            for j, s in enumerate(layer_bits):
                if s == 1:
                    a_rows.append(-a[j])
                    d_vals.append(c[j])
                else:
                    a_rows.append(a[j])
                    d_vals.append(-c[j])
        return Polyhedron(np.array(a_rows), np.array(d_vals))

    # -- indicators from points and boxes --------------------------------------

    def feasible_indicators(self, x, tol_zero: float = 1e-9,
                            branch_cap: int = 20) -> list[ActivationIndicator]:
        """All indicators whose region contains x.

        Neurons with |pre-activation| <= tol_zero are branched both ways,
        recomputing downstream pre-activations per branch since the mask
        changes what later layers see.  Raises CombinatorialBlowup when more
        than branch_cap neurons along one branch are ambiguous.
        """
        x = np.asarray(x, dtype=float)
        results: dict[tuple, ActivationIndicator] = {}

        def descend(layer, z, prefix, branched):
            if layer == len(self.weights):
                ind = ActivationIndicator(prefix)
                results[ind.key()] = ind
                return
            pre = self.weights[layer] @ z + self.biases[layer]
            ambiguous = np.flatnonzero(np.abs(pre) <= tol_zero)
            if branched + ambiguous.size > branch_cap:
                raise CombinatorialBlowup(
                    f"{branched + ambiguous.size} simultaneously-zero neurons "
                    f"exceed the cap of {branch_cap}")
            base = (pre > tol_zero).astype(int)
            for combo in itertools.product((0, 1), repeat=ambiguous.size):
                bits = base.copy()
                bits[ambiguous] = combo
                z_next = np.where(bits == 1, pre, 0.0)
                descend(layer + 1, z_next, prefix + (tuple(int(v) for v in bits),),
                        branched + ambiguous.size)

        descend(0, x, (), 0)
        return [results[k] for k in sorted(results)]

    def ibp_candidate(self, box) -> CandidateIndicator:
        """Interval bound propagation over an input box.

        Entries: 1 where the pre-activation interval is strictly positive,
        0 where strictly negative, -1 otherwise.
        """
        box = np.asarray(box, dtype=float)
        if box.shape != (self.input_dim, 2):
            raise DimensionMismatch(f"box shape {box.shape}, expected ({self.input_dim}, 2)")
        lo, hi = box[:, 0].copy(), box[:, 1].copy()
        layers = []
        for w, b in zip(self.weights, self.biases):
            w_pos = np.maximum(w, 0.0)
            w_neg = np.minimum(w, 0.0)
            pre_lo = w_pos @ lo + w_neg @ hi + b
            pre_hi = w_pos @ hi + w_neg @ lo + b
            bits = np.where(pre_lo > 0.0, 1, np.where(pre_hi < 0.0, 0, -1))
            layers.append(tuple(int(v) for v in bits))
            lo = np.maximum(pre_lo, 0.0)
            hi = np.maximum(pre_hi, 0.0)
        return CandidateIndicator(tuple(layers))


def expand_candidate(cand: CandidateIndicator,
                     branch_cap: int = 20) -> list[ActivationIndicator]:
    """All completions of a candidate's -1 slots, in lexicographic order
    (slots enumerated layer-major, 0 before 1)."""
    slots = [(i, j) for i, layer in enumerate(cand.bits)
             for j, v in enumerate(layer) if v == -1]
    if len(slots) > branch_cap:
        raise CombinatorialBlowup(
            f"{len(slots)} undetermined neurons exceed the cap of {branch_cap}")
    out = []
    for combo in itertools.product((0, 1), repeat=len(slots)):
        layers = [list(layer) for layer in cand.bits]
        for (i, j), v in zip(slots, combo):
            layers[i][j] = v
        out.append(ActivationIndicator(tuple(tuple(layer) for layer in layers)))
    return out


# -- JSON form ----------------------------------------------------------------

def network_from_json(data: dict) -> ReluNetwork:
    """Build a network from its JSON description.

    Format: {"input_dim": n, "layers": [{"weights": [[...]], "bias": [...]},
    ...], "output_weights": [...], "output_bias": f}
    """
    for key in ("input_dim", "layers", "output_weights", "output_bias"):
        if key not in data:
            raise MissingField(f"network description lacks {key!r}")
    layers = data["layers"]
    if not isinstance(layers, list) or not layers:
        raise ProblemFormatError("'layers' must be a nonempty list")
    weights, biases = [], []
    for i, layer in enumerate(layers):
        if "weights" not in layer or "bias" not in layer:
            raise MissingField(f"layer {i} lacks 'weights' or 'bias'")
        weights.append(layer["weights"])
        biases.append(layer["bias"])
    net = ReluNetwork(weights, biases, data["output_weights"], data["output_bias"])
    if net.input_dim != int(data["input_dim"]):
        raise DimensionMismatch(
            f"declared input_dim {data['input_dim']} but first layer takes {net.input_dim}")
    return net


def network_to_json(net: ReluNetwork) -> dict:
    return {
        "input_dim": net.input_dim,
        "layers": [{"weights": w.tolist(), "bias": b.tolist()}
                   for w, b in zip(net.weights, net.biases)],
        "output_weights": net.output_weights.tolist(),
        "output_bias": net.output_bias,
    }


def load_network(path) -> ReluNetwork:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"network file {path}: {exc}") from exc
    return network_from_json(data)
