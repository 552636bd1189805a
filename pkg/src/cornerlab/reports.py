"""Deterministic delimited reports and the golden-table registry.

Every text report is byte-reproducible: rows are sorted, rationals are
exact, and symbolic orders use the canonical linear-form rendering.  The
golden registry maps table names to producers so the bundled tables can be
recomputed and compared byte-for-byte.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import catalog
from .rules import derived_rule, stated_rule
from .spaces import WHOLE, Fibration, Space


def render_faces(space: Space) -> str:
    lines = [
        f"space\t{space.name}",
        f"ideals\t{','.join(space.ideals)}",
        f"count\t{len(space.faces)}",
    ]
    for f in sorted(space.faces):
        vec = ",".join(str(v) for v in space.vector(f))
        lines.append(f"face\t{f}\t{vec}\t{space.weight[f]}")
    return "\n".join(lines) + "\n"


def render_images(fib: Fibration) -> str:
    table = fib.image_table()
    lines = [f"{f}\t{table[f]}" for f in sorted(fib.source.faces)]
    return "\n".join(lines) + "\n"


def render_weights(
    space: Space, convention: str = "b", right_ideals: Sequence[str] = ()
) -> str:
    table = space.density_weight(convention, right_ideals=tuple(right_ideals))
    lines = [f"{f}\t{table[f]}" for f in sorted(space.faces)]
    return "\n".join(lines) + "\n"


def render_lift(space: Space, ideal: str) -> str:
    table = space.lift_ideal(ideal)
    lines = [f"{f}\t{table[f]}" for f in sorted(space.faces)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# golden registry


def golden_producers() -> Dict[str, Callable[[], str]]:
    """Producers for every bundled golden table, keyed by table name."""

    def images(name: str) -> Callable[[], str]:
        return lambda: render_images(catalog.load_fibration(name))

    def lift(space: str, ideal: str) -> Callable[[], str]:
        return lambda: render_lift(catalog.load_space(space), ideal)

    return {
        "com1": images("kphi3_l"),
        "com2": images("kphi3_c"),
        "com3": images("kphi3_r"),
        "com4": lambda: render_weights(catalog.load_space("m3_kphi"), "b"),
        "com5": lift("m2_kphi", "xp"),
        "com7": lift("m3_kphi", "xp"),
        "com8": lift("m3_kphi", "xpp"),
        "com10": lambda: render_weights(
            catalog.load_space("m3_kphi"), "composition", ("xp", "xpp")
        ),
        "rule_phi18b": lambda: derived_rule("phi18b").render(),
        "rule_com12b": lambda: derived_rule("com12b").render(),
        "rule_com14b": lambda: stated_rule("com14b").render(),
    }


def compare_golden(names: Optional[Sequence[str]] = None) -> Tuple[bool, List[str]]:
    """Recompute golden tables and byte-compare with the bundled copies.

    Without ``names``, every bundled table is checked.
    """
    producers = golden_producers()
    stored = set(catalog.golden_names())
    wanted = sorted(set(producers) | stored) if names is None else list(names)
    lines: List[str] = []
    ok = True
    for name in wanted:
        if name not in producers and name not in stored:
            lines.append(f"FAIL {name}: unknown golden table")
            ok = False
            continue
        if name not in producers:
            lines.append(f"FAIL {name}: bundled table has no producer")
            ok = False
            continue
        if name not in stored:
            lines.append(f"FAIL {name}: no bundled table")
            ok = False
            continue
        fresh = producers[name]()
        kept = catalog.load_golden(name)
        if fresh == kept:
            lines.append(f"ok   {name}")
        else:
            ok = False
            fresh_lines = fresh.splitlines()
            kept_lines = kept.splitlines()
            detail = ""
            for i in range(max(len(fresh_lines), len(kept_lines))):
                a = fresh_lines[i] if i < len(fresh_lines) else "<missing>"
                b = kept_lines[i] if i < len(kept_lines) else "<missing>"
                if a != b:
                    detail = f" (line {i + 1}: computed {a!r} vs bundled {b!r})"
                    break
            lines.append(f"FAIL {name}: tables differ{detail}")
    return ok, lines


# ---------------------------------------------------------------------------
# figures (optional, for report rendering alongside the delimited output)


def draw_graph(space: Space, path: str) -> None:
    """Render the face-intersection graph to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(sorted(space.faces))
    g.add_edges_from(space.edges())
    pos = nx.spring_layout(g, seed=7)
    fig, ax = plt.subplots(figsize=(7, 5))
    nx.draw_networkx(
        g,
        pos=pos,
        ax=ax,
        node_color="#cfe2ff",
        node_size=900,
        font_size=8,
        edge_color="#666666",
    )
    ax.set_title(f"{space.name}: {len(space.faces)} boundary faces")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def draw_bessel(probe, path: str) -> None:
    """Render the decay probe on log-log axes with its fitted power law."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.loglog(probe.kappas, probe.values, color="#1f4e8c", lw=1.5, label="solution")
    fit = probe.fit_scale * probe.kappas**probe.fitted_exponent
    ax.loglog(
        probe.kappas,
        fit,
        color="#c0392b",
        lw=1.0,
        ls="--",
        label=f"fit ~ kappa^{probe.fitted_exponent:.4f}",
    )
    ax.set_xlabel("kappa")
    ax.set_ylabel("|f(kappa)|")
    ax.set_title(f"recessive solution near zero, alpha={probe.alpha} ({probe.verdict})")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
