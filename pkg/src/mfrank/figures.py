"""Plot-ready tables (column name -> array) for the figure pipelines."""
from __future__ import annotations

import numpy as np

from . import analytics as an
from .meanfield import closed_form_mean, closed_form_variance, coefficient_of_variation


def pagerank_histogram(p, ratio=an.DEFAULT_BIN_RATIO) -> dict:
    """fig1: log-binned PageRank distribution."""
    h = an.log_histogram(p, ratio)
    return {"pagerank_lo": h.edges[:-1], "pagerank_hi": h.edges[1:], "pagerank": h.centers,
            "count": h.count, "density": h.density}


def class_means(t, mf, emp) -> dict:
    """fig2: mean-field against empirical class averages."""
    return {"k_in": t.k_in, "k_out": t.k_out, "count": t.counts, "p_mf": mf.mean, "p_empirical": emp.mean}


def meanfield_table(t, mf, fl, emp) -> dict:
    """Per-class means and variances, recursion against empirical."""
    return {"k_in": t.k_in, "k_out": t.k_out, "count": t.counts, "p_mf": mf.mean, "p_empirical": emp.mean,
            "sigma2_mf": fl.variance, "sigma2_empirical": emp.variance}


def meanfield_marginal(mf, fl, emp) -> dict:
    """The same table pooled over k_out."""
    kin, cnt, pm, _ = mf.marginal()
    _, _, pe, ve = emp.marginal()
    _, _, _, vm = fl.marginal()
    return {"k_in": kin, "count": cnt, "p_mf": pm, "p_empirical": pe, "sigma2_mf": vm, "sigma2_empirical": ve}


def indegree_profile(g, p, model, ratio=an.DEFAULT_BIN_RATIO) -> dict:
    """fig3: binned PageRank against in-degree with the closed-form line."""
    has_in = g.k_in > 0
    b = an.log_binned_mean(g.k_in[has_in].astype(np.float64), p[has_in], ratio)
    occ = b.occupied
    return {"k_in": b.mean_x[occ], "count": b.count[occ], "p_empirical": b.mean_y[occ],
            "p_closed_form": closed_form_mean(model, b.mean_x[occ])}


def fluctuation_profile(g, p, t, fl, model, ratio=an.DEFAULT_BIN_RATIO) -> dict:
    """fig4: coefficient of variation and variance per in-degree bin."""
    has_in = g.k_in > 0
    k = g.k_in[has_in].astype(np.float64)
    b = an.log_binned_mean(k, p[has_in], ratio)
    rec = an.log_binned_mean(k, fl.variance[t.class_of[has_in]], ratio)
    occ = b.occupied
    kx = b.mean_x[occ]
    try:
        cf = closed_form_variance(model, kx)
        cov_cf = coefficient_of_variation(model, kx, exact=True)
    except ValueError:
        cf = cov_cf = np.full(len(kx), np.nan)
    return {"k_in": kx, "count": b.count[occ], "cov_empirical": np.sqrt(b.var_y[occ]) / b.mean_y[occ],
            "cov_closed_form": cov_cf, "cov_large_k": coefficient_of_variation(model, kx),
            "sigma2_empirical": b.var_y[occ], "sigma2_recursion": rec.mean_y[occ], "sigma2_closed_form": cf}


def class_distribution(p, t, k_in, ratio=an.DEFAULT_BIN_RATIO) -> dict:
    """fig5: PageRank histogram inside one in-degree class."""
    h = an.per_class_distribution(p, t, k_in, ratio)
    return {"k_in": np.full(len(h), k_in), "pagerank": h.centers, "count": h.count, "density": h.density}


def zipf_table(p) -> dict:
    """fig6: PageRank against global rank."""
    r, v = an.zipf_curve(p)
    return {"rank": r, "pagerank": v}


def concat(tables) -> dict:
    return {k: np.concatenate([np.asarray(t[k]) for t in tables]) for k in tables[0]}
