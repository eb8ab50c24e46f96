import numpy as np
import pytest

from gclgcn.config import ConfigError, ContrastiveConfig, ExperimentConfig
from gclgcn.graph import SbmSpec, generate_sbm
from gclgcn.harness import (
    best_fusion_row,
    composite_index,
    encoding_study,
    layer_study,
    sweep_fusion,
    sweep_loss_weights,
)


def sbm(seed=2, sizes=(15, 15, 15), f=6):
    k = len(sizes)
    means = np.zeros((k, f))
    for b in range(k):
        means[b, b] = 2.5
    spec = SbmSpec(block_sizes=sizes, p_in=0.4, p_out=0.03, means=means, noise_std=0.6)
    return generate_sbm(spec, seed=seed)


def cfg(**over):
    base = dict(
        epochs=3, k=3, n_z=3, layers=2, lr=1e-3, seed=0,
        contrastive=ContrastiveConfig(hidden=8, epochs=2),
    )
    base.update(over)
    return ExperimentConfig(**base)


def test_composite_index_is_metric_mean():
    row = {"acc": 0.8, "nmi": 0.6, "ari": 0.4, "f1": 0.7}
    assert composite_index(row) == pytest.approx(0.625, abs=1e-15)


def test_fusion_sweep_skips_infeasible_and_best_is_max():
    g = sbm()
    rows = sweep_fusion(g, cfg(), lambdas=(0.2, 0.8), thetas=(0.2, 0.8))
    combos = {(r["lambda"], r["theta"]) for r in rows}
    assert len(rows) == 3  # (0.8, 0.8) infeasible
    assert ("0.8", "0.8") not in combos
    best = best_fusion_row(rows)
    assert best["f1"] == max(r["f1"] for r in rows)


def test_fusion_sweep_rejects_empty_grid():
    g = sbm()
    with pytest.raises(ConfigError, match="no feasible"):
        best_fusion_row([])
    with pytest.raises(ConfigError, match="nonempty"):
        sweep_loss_weights(g, cfg(), alphas=(), betas=(0.1,))


def test_loss_weight_sweep_cross_product():
    g = sbm(sizes=(8, 8), f=4)
    rows = sweep_loss_weights(g, cfg(k=2, epochs=2), alphas=(0.05, 0.1), betas=(0.1,))
    assert len(rows) == 2
    assert {r["alpha"] for r in rows} == {"0.05", "0.1"}


def test_alpha_beta_zero_matches_pure_reconstruction():
    g = sbm(sizes=(8, 8), f=4)
    c = cfg(k=2, epochs=2)
    rows = sweep_loss_weights(g, c, alphas=(0.0,), betas=(0.0,))
    from dataclasses import replace

    from gclgcn.cluster import metric_row
    from gclgcn.pipeline import train

    res = train(g, replace(c, alpha=0.0, beta=0.0))
    want = metric_row(res.labels, g.labels)
    got = {k2: rows[0][k2] for k2 in ("acc", "nmi", "ari", "f1")}
    assert got == want


def test_encoding_study_labels_and_count():
    g = sbm(sizes=(8, 8), f=4)
    rows = encoding_study(g, cfg(k=2, epochs=1), dataset="toy")
    assert [r["variant"] for r in rows] == [
        "GCL-GCN", "DC, BC and CC + SPD", "DC + ED", "BC + ED", "CC + ED",
    ]
    assert all(r["dataset"] == "toy" for r in rows)


def test_layer_study_rows_and_depth_trend():
    g = sbm(seed=4)
    c = cfg(epochs=30, lr=1e-3, seed=1)
    rows = layer_study(g, c, depths=(3, 1))
    assert [r["variant"] for r in rows] == ["GCL-GCN-3", "GCL-GCN-1"]
    by = {r["variant"]: r for r in rows}
    assert by["GCL-GCN-3"]["f1"] >= by["GCL-GCN-1"]["f1"]
