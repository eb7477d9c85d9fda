"""Figure rendering for the report paths (opt-in via --plot)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def atlas_figure(rows: list[dict], path: str):
    """Epsilon sweep and formula orders against the residue field order."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    xs, closed, euler, orders = [], [], [], []
    for row in rows:
        if row.get("error"):
            continue
        q = row.get("residue_order")
        if q is None:
            continue
        xs.append(q)
        closed.append(row.get("epsilon_closed"))
        euler.append(row.get("epsilon_euler"))
        orders.append(row.get("formula_order"))
    ax1.scatter([x for x, e in zip(xs, euler) if e is not None],
                [e for e in euler if e is not None],
                marker="o", s=36, facecolors="none", edgecolors="tab:blue",
                label="Euler criterion")
    ax1.scatter([x for x, e in zip(xs, closed) if e is not None],
                [e for e in closed if e is not None],
                marker="x", s=24, color="tab:red", label="congruence form")
    ax1.set_ylabel(r"$\epsilon$")
    ax1.set_yticks([-1, 1])
    ax1.legend(loc="center right", fontsize=8)
    ax1.set_title("Witt-type epsilon by residue field order")

    pts = [(x, o) for x, o in zip(xs, orders) if o]
    if pts:
        ax2.scatter([p[0] for p in pts], [p[1] for p in pts],
                    s=16, color="tab:green")
        ax2.set_yscale("log")
    ax2.set_xlabel("residue field order")
    ax2.set_ylabel("formula order")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fvector_figure(reports: list[dict], path: str):
    """Face counts per report, one bar group per modulus."""
    fig, ax = plt.subplots(figsize=(8, 4))
    width = 0.8
    ticks, labels = [], []
    pos = 0.0
    for rpt in reports:
        fv = rpt.get("f_vector") or []
        if not fv:
            continue
        xs = [pos + i for i in range(len(fv))]
        ax.bar(xs, fv, width=width,
               label=f"{rpt.get('group')} mod {rpt.get('modulus')}")
        ticks.extend(xs)
        labels.extend([f"f{i}" for i in range(len(fv))])
        pos += len(fv) + 1
    ax.set_xticks(ticks)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("face count")
    if ticks:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
