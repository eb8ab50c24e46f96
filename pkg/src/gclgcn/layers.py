"""Forward architectures: autoencoder, graph-convolution stack, centrality-
and distance-biased attention layer, and the contrastive encoder with its
similarity and loss.

All layers share the width ladder in->500->500->2000->bottleneck (truncated
for shallower depth settings) and Leaky ReLU hidden activations; final
reconstruction layers are linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .centrality import SpatialBias
from .graph import Graph

__all__ = [
    "ladder_dims",
    "glorot",
    "AEParams",
    "GcnParams",
    "GraphormerLayerParams",
    "GraphormerParams",
    "ContrastiveParams",
    "ae_forward",
    "ae_loss",
    "gcn_layer",
    "attention_logit_bias",
    "graphormer_layer",
    "augment_features",
    "contrastive_encoder",
    "combined_similarity",
    "contrastive_loss",
    "inner_product_decode",
]

# Hidden widths of the full four-layer encoder; shallower depths keep the
# outermost entries so the deepest case is the full stock ladder.
_FULL_HIDDEN = (500, 500, 2000)
_HIDDEN_BY_DEPTH = {1: (), 2: (500,), 3: (500, 2000), 4: _FULL_HIDDEN}


def ladder_dims(in_dim: int, bottleneck: int, depth: int = 4) -> list[int]:
    """Encoder dimension chain [in, hidden..., bottleneck] for a given depth."""
    if depth not in _HIDDEN_BY_DEPTH:
        raise ValueError(f"depth must be one of {sorted(_HIDDEN_BY_DEPTH)}, got {depth}")
    return [in_dim, *_HIDDEN_BY_DEPTH[depth], bottleneck]


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def _recip(x: Tensor) -> Tensor:
    """1/x for strictly positive x."""
    return ad.exp(ad.scale(ad.log(x), -1.0))


# ---------------------------------------------------------------------------
# Autoencoder
# ---------------------------------------------------------------------------

@dataclass
class AEParams:
    enc_w: list[Tensor]
    enc_b: list[Tensor]
    dec_w: list[Tensor]
    dec_b: list[Tensor]

    @classmethod
    def init(cls, rng: np.random.Generator, dims: list[int]) -> "AEParams":
        enc_w, enc_b, dec_w, dec_b = [], [], [], []
        for a, b in zip(dims[:-1], dims[1:]):
            enc_w.append(ad.parameter(glorot(rng, a, b)))
            enc_b.append(ad.parameter(np.zeros((1, b))))
        rev = dims[::-1]
        for a, b in zip(rev[:-1], rev[1:]):
            dec_w.append(ad.parameter(glorot(rng, a, b)))
            dec_b.append(ad.parameter(np.zeros((1, b))))
        return cls(enc_w, enc_b, dec_w, dec_b)

    def named(self, prefix: str = "ae") -> list[tuple[str, Tensor]]:
        out = []
        for i, (w, b) in enumerate(zip(self.enc_w, self.enc_b)):
            out += [(f"{prefix}.enc.{i}.w", w), (f"{prefix}.enc.{i}.b", b)]
        for i, (w, b) in enumerate(zip(self.dec_w, self.dec_b)):
            out += [(f"{prefix}.dec.{i}.w", w), (f"{prefix}.dec.{i}.b", b)]
        return out


def ae_forward(params: AEParams, x: Tensor) -> tuple[list[Tensor], Tensor]:
    """Returns every encoder layer output (last one is the bottleneck) and the
    reconstruction; the final decoder layer is linear."""
    hs: list[Tensor] = []
    h = x
    for w, b in zip(params.enc_w, params.enc_b):
        h = ad.leaky_relu(ad.add(ad.matmul(h, w), b))
        hs.append(h)
    out = hs[-1]
    last = len(params.dec_w) - 1
    for i, (w, b) in enumerate(zip(params.dec_w, params.dec_b)):
        out = ad.add(ad.matmul(out, w), b)
        if i != last:
            out = ad.leaky_relu(out)
    return hs, out


def ae_loss(x: Tensor, xhat: Tensor) -> Tensor:
    """Half the mean per-sample squared reconstruction norm."""
    n = x.shape[0]
    diff = ad.add(x, ad.scale(xhat, -1.0))
    return ad.scale(ad.reduce_sum(ad.square(diff)), 0.5 / n)


# ---------------------------------------------------------------------------
# Graph convolution
# ---------------------------------------------------------------------------

@dataclass
class GcnParams:
    enc_w: list[Tensor]
    dec_w: list[Tensor]

    @classmethod
    def init(cls, rng: np.random.Generator, dims: list[int]) -> "GcnParams":
        enc = [ad.parameter(glorot(rng, a, b)) for a, b in zip(dims[:-1], dims[1:])]
        rev = dims[::-1]
        dec = [ad.parameter(glorot(rng, a, b)) for a, b in zip(rev[:-1], rev[1:])]
        return cls(enc, dec)

    def named(self, prefix: str = "gcn") -> list[tuple[str, Tensor]]:
        out = [(f"{prefix}.enc.{i}.w", w) for i, w in enumerate(self.enc_w)]
        out += [(f"{prefix}.dec.{i}.w", w) for i, w in enumerate(self.dec_w)]
        return out


def gcn_layer(adj: Tensor, z: Tensor, w: Tensor, activate: bool = True) -> Tensor:
    """One propagation step over the normalized self-looped adjacency."""
    out = ad.matmul(ad.matmul(adj, z), w)
    return ad.leaky_relu(out) if activate else out


# ---------------------------------------------------------------------------
# Centrality- and distance-biased attention
# ---------------------------------------------------------------------------

@dataclass
class GraphormerLayerParams:
    w_key: Tensor
    w_query: Tensor
    w_value: Tensor
    wc_key: Tensor
    wc_query: Tensor
    wc_value: Tensor


@dataclass
class GraphormerParams:
    enc: list[GraphormerLayerParams]
    dec: list[GraphormerLayerParams]
    heads: int

    @classmethod
    def init(
        cls,
        rng: np.random.Generator,
        dims: list[int],
        cent_dim: int,
        heads: int = 1,
        cent_scale: np.ndarray | None = None,
    ) -> "GraphormerParams":
        """cent_scale holds the typical magnitude of each centrality column;
        the centrality projections start inversely scaled so unnormalized
        measures (betweenness can reach hundreds) do not blow up the layer
        outputs before training can adapt."""
        if cent_scale is None:
            cent_scale = np.ones(cent_dim)
        inv = (1.0 / np.maximum(np.asarray(cent_scale, dtype=np.float64), 1.0))[:, None]

        def layer(d_in: int, d_out: int) -> GraphormerLayerParams:
            wide = heads * d_out
            return GraphormerLayerParams(
                w_key=ad.parameter(glorot(rng, d_in, wide)),
                w_query=ad.parameter(glorot(rng, d_in, wide)),
                w_value=ad.parameter(glorot(rng, d_in, wide)),
                wc_key=ad.parameter(glorot(rng, cent_dim, wide) * inv),
                wc_query=ad.parameter(glorot(rng, cent_dim, wide) * inv),
                wc_value=ad.parameter(glorot(rng, cent_dim, wide) * inv),
            )

        enc = [layer(a, b) for a, b in zip(dims[:-1], dims[1:])]
        rev = dims[::-1]
        dec = [layer(a, b) for a, b in zip(rev[:-1], rev[1:])]
        return cls(enc, dec, heads)

    def named(self, prefix: str = "graphormer") -> list[tuple[str, Tensor]]:
        out = []
        for part, layers in (("enc", self.enc), ("dec", self.dec)):
            for i, lp in enumerate(layers):
                for role in ("key", "query", "value"):
                    out.append((f"{prefix}.{part}.{i}.w_{role}", getattr(lp, f"w_{role}")))
                    out.append((f"{prefix}.{part}.{i}.wc_{role}", getattr(lp, f"wc_{role}")))
        return out


def attention_logit_bias(g: Graph, bias: SpatialBias, sign: str = "+") -> np.ndarray:
    """Dense additive logit term: signed spatial distance on each neighbor or
    self pair, -inf outside the attention support."""
    if sign not in ("+", "-"):
        raise ValueError(f"spatial sign must be '+' or '-', got {sign!r}")
    s = 1.0 if sign == "+" else -1.0
    n = g.n
    out = np.full((n, n), -np.inf)
    try:
        for i in range(n):
            out[i, i] = s * bias.values[(i, i)]
        for u, v in g.edges:
            out[u, v] = s * bias.values[(u, v)]
            out[v, u] = s * bias.values[(v, u)]
    except KeyError as exc:
        raise ValueError(f"spatial bias missing required pair {exc.args[0]}") from None
    return out


def _cols(t: Tensor, lo: int, hi: int) -> Tensor:
    return ad.transpose(ad.gather_rows(ad.transpose(t), np.arange(lo, hi)))


def graphormer_layer(
    z: Tensor,
    centrality: Tensor,
    logit_bias: Tensor,
    params: GraphormerLayerParams,
    heads: int = 1,
    activate: bool = True,
) -> Tensor:
    """Attention over each node's neighborhood (self included), with centrality
    terms added to every projection and the spatial bias added to the logits.
    Head outputs are averaged, then passed through Leaky ReLU unless this is a
    final (linear) reconstruction layer."""
    if centrality.shape[0] != z.shape[0]:
        raise ValueError(
            f"graphormer_layer: centrality rows {centrality.shape[0]} != nodes {z.shape[0]}"
        )
    keys = ad.add(ad.matmul(z, params.w_key), ad.matmul(centrality, params.wc_key))
    queries = ad.add(ad.matmul(z, params.w_query), ad.matmul(centrality, params.wc_query))
    values = ad.add(ad.matmul(z, params.w_value), ad.matmul(centrality, params.wc_value))
    d_head = keys.shape[1] // heads

    combined = None
    for h in range(heads):
        if heads == 1:
            kh, qh, vh = keys, queries, values
        else:
            kh = _cols(keys, h * d_head, (h + 1) * d_head)
            qh = _cols(queries, h * d_head, (h + 1) * d_head)
            vh = _cols(values, h * d_head, (h + 1) * d_head)
        logits = ad.add(
            ad.scale(ad.matmul(qh, ad.transpose(kh)), 1.0 / math.sqrt(d_head)),
            logit_bias,
        )
        att = ad.row_softmax(logits)
        head_out = ad.matmul(att, vh)
        combined = head_out if combined is None else ad.add(combined, head_out)
    out = ad.scale(combined, 1.0 / heads)
    return ad.leaky_relu(out) if activate else out


# ---------------------------------------------------------------------------
# Contrastive module
# ---------------------------------------------------------------------------

@dataclass
class ContrastiveParams:
    w0: Tensor  # in x hidden
    w1: Tensor  # hidden x in

    @classmethod
    def init(cls, rng: np.random.Generator, in_dim: int, hidden: int) -> "ContrastiveParams":
        return cls(
            w0=ad.parameter(glorot(rng, in_dim, hidden)),
            w1=ad.parameter(glorot(rng, hidden, in_dim)),
        )

    def named(self, prefix: str = "contrastive") -> list[tuple[str, Tensor]]:
        return [(f"{prefix}.w0", self.w0), (f"{prefix}.w1", self.w1)]


def augment_features(x: np.ndarray, p: float, seed: int) -> np.ndarray:
    """Random feature masking: each entry survives with probability 1 - p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mask rate must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    mask = rng.random(x.shape) >= p
    return x * mask


def contrastive_encoder(adj: Tensor, x: Tensor, params: ContrastiveParams) -> Tensor:
    """Two propagation layers: ReLU after the first, linear second."""
    c1 = ad.relu(ad.matmul(ad.matmul(adj, x), params.w0))
    return ad.matmul(ad.matmul(adj, c1), params.w1)


def combined_similarity(c1: Tensor, c2: Tensor, exponent: float = 1.0) -> Tensor:
    """Pairwise cosine similarity times inverse-distance similarity, passed
    through a sign-preserving power. Row norms are floored at 1e-12."""
    n = c1.shape[0]
    ones_col = ad.constant(np.ones((c1.shape[1], 1)))

    sq1 = ad.matmul(ad.square(c1), ones_col)  # (n, 1) row norms squared
    sq2 = ad.matmul(ad.square(c2), ones_col)
    norm1 = ad.clamp_min(ad.sqrt(sq1), 1e-12)
    norm2 = ad.clamp_min(ad.sqrt(sq2), 1e-12)

    gram = ad.matmul(c1, ad.transpose(c2))
    cos = ad.hadamard(gram, _recip(ad.matmul(norm1, ad.transpose(norm2))))

    row = ad.matmul(sq1, ad.constant(np.ones((1, n))))
    col = ad.matmul(ad.constant(np.ones((n, 1))), ad.transpose(sq2))
    d2 = ad.clamp_min(ad.add(ad.add(row, col), ad.scale(gram, -2.0)), 0.0)
    euc = _recip(ad.add(ad.sqrt(d2), ad.constant(np.ones((n, n)))))

    return ad.signed_pow(ad.hadamard(cos, euc), exponent)


def contrastive_loss(s: Tensor, tau: float) -> Tensor:
    """Mean cross-entropy of each similarity row against its diagonal entry,
    computed with a detached log-sum-exp shift for stability."""
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    n = s.shape[0]
    logits = ad.scale(s, 1.0 / tau)
    shift = ad.constant(logits.value.max(axis=1, keepdims=True))
    e = ad.exp(ad.add(logits, ad.scale(shift, -1.0)))
    lse = ad.add(ad.log(ad.matmul(e, ad.constant(np.ones((n, 1))))), shift)
    diag = ad.reduce_sum(ad.hadamard(logits, ad.constant(np.eye(n))))
    return ad.scale(ad.add(ad.reduce_sum(lse), ad.scale(diag, -1.0)), 1.0 / n)


def inner_product_decode(z: Tensor) -> Tensor:
    """Edge-probability matrix sigmoid(Z Z^T)."""
    return ad.sigmoid(ad.matmul(z, ad.transpose(z)))
