"""Command-line front end: catalog reports, rule derivation, scenario replay.

Exit codes follow one contract everywhere: 0 on success, 1 on validation or
arithmetic errors (unknown names, malformed files, impossible parameters,
failed integrability), 2 when a verification subject fails (golden-table
mismatch, failed replay expectation, failed condition check).  Text reports
are byte-deterministic; ``--render`` writes figures next to them.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from typing import Dict, Optional, Sequence

import click

from . import catalog, reports
from .ledger import ReplayError, replay
from .rules import (
    DERIVATIONS,
    RuleError,
    compose_families,
    derived_rule,
    parse_family,
    render_family,
    rule_names,
    stated_rule,
    substitute_h,
)
from .spaces import SpaceError, check_commutes, emit_dot
from .spectral import (
    SpectralError,
    bessel_l2_probe,
    check_fine,
    check_gs_comparison,
    check_int12b,
    gap_radius,
    hodge_indicial_roots,
    normalize_dataset,
    roots_symmetric,
    scale_search,
)


def _load_json_file(path: str) -> object:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
def cli() -> None:
    """Symbolic workbench for corner geometry and operator calculi."""


@cli.command(name="catalog")
def catalog_cmd() -> None:
    """List every bundled space, fibration, rule, scenario and golden table."""
    for name in catalog.space_names():
        space = catalog.load_space(name)
        click.echo(f"space\t{name}\t{len(space.faces)}")
    for name in catalog.fibration_names():
        fib = catalog.load_fibration(name)
        click.echo(f"fibration\t{name}\t{fib.source.name}\t{fib.target.name}")
    for name in rule_names():
        rule = stated_rule(name)
        kind = "derivable" if name in DERIVATIONS else "stated"
        click.echo(f"rule\t{name}\t{rule.space}\t{kind}")
    for name in catalog.scenario_names():
        scenario = catalog.load_scenario(name)
        click.echo(f"scenario\t{name}\t{scenario['rule']}")
    for name in catalog.golden_names():
        click.echo(f"golden\t{name}")


@cli.command(name="faces")
@click.argument("space")
def faces_cmd(space: str) -> None:
    """Face list with valuation vectors and density weights (TSV)."""
    click.echo(reports.render_faces(catalog.load_space(space)), nl=False)


@cli.command(name="dot")
@click.argument("space")
@click.option("--render", type=click.Path(dir_okay=False), default=None,
              help="Also draw the face-intersection graph to this image file.")
def dot_cmd(space: str, render: Optional[str]) -> None:
    """Face-intersection graph as deterministic node/edge text."""
    loaded = catalog.load_space(space)
    click.echo(emit_dot(loaded), nl=False)
    if render:
        reports.draw_graph(loaded, render)
        click.echo(f"wrote {render}", err=True)


@cli.command(name="images")
@click.argument("fibration")
def images_cmd(fibration: str) -> None:
    """Face-image table of a boundary fibration (TSV)."""
    click.echo(reports.render_images(catalog.load_fibration(fibration)), nl=False)


@cli.command(name="weights")
@click.argument("space")
@click.option("--convention", type=click.Choice(["b", "phi_right", "composition"]),
              default="b", show_default=True)
@click.option("--right", "right_ideals", multiple=True,
              help="Right defining function(s) for the fibered conventions.")
def weights_cmd(space: str, convention: str, right_ideals: Sequence[str]) -> None:
    """Per-face density multiweight under the chosen convention (TSV)."""
    loaded = catalog.load_space(space)
    click.echo(reports.render_weights(loaded, convention, right_ideals), nl=False)


@cli.command(name="lift")
@click.argument("space")
@click.argument("ideal")
def lift_cmd(space: str, ideal: str) -> None:
    """Per-face valuation of one lifted defining function (TSV)."""
    click.echo(reports.render_lift(catalog.load_space(space), ideal), nl=False)


@cli.command(name="derive")
@click.argument("triple")
@click.option("--h", "h", type=int, default=None,
              help="Evaluate symbolic shifts at this fiber dimension.")
def derive_cmd(triple: str, h: Optional[int]) -> None:
    """Derive the composition rule carried by a triple space (TSV)."""
    by_triple: Dict[str, str] = {}
    for rule_name, (triple_name, *_rest) in DERIVATIONS.items():
        by_triple[triple_name] = rule_name
        by_triple[rule_name] = rule_name
    if triple not in by_triple:
        raise RuleError(
            f"no derivation recipe for {triple!r}; try one of {sorted(by_triple)}"
        )
    rule = derived_rule(by_triple[triple])
    if h is not None:
        rule = substitute_h(rule, h)
    click.echo(rule.render(), nl=False)


@cli.command(name="compose")
@click.argument("rule")
@click.argument("left", type=click.Path(exists=True, dir_okay=False))
@click.argument("right", type=click.Path(exists=True, dir_okay=False))
@click.option("--h", "h", type=int, default=1, show_default=True,
              help="Fiber dimension substituted into the rule shifts.")
def compose_cmd(rule: str, left: str, right: str, h: int) -> None:
    """Compose two index families (JSON files) under a stated rule (TSV)."""
    loaded = stated_rule(rule)
    env = {"h": Fraction(h)}
    fam_left = parse_family(_load_json_file(left), loaded.faces, env)
    fam_right = parse_family(_load_json_file(right), loaded.faces, env)
    out = compose_families(loaded, fam_left, fam_right, Fraction(h))
    click.echo(render_family(loaded.faces, out), nl=False)


@cli.command(name="replay")
@click.argument("scenario")
@click.option("--h", "h", type=int, default=1, show_default=True)
@click.option("--param", "params", multiple=True, metavar="NAME=VALUE",
              help="Override a scenario parameter (repeatable).")
@click.option("--no-assertions", is_flag=True,
              help="Skip the justified replacement steps.")
def replay_cmd(scenario: str, h: int, params: Sequence[str], no_assertions: bool) -> None:
    """Replay a parametrix construction and verify its expectations."""
    overrides = {}
    for item in params:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise click.BadParameter(f"parameters look like name=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    result = replay(
        catalog.load_scenario(scenario),
        h=h,
        overrides=overrides,
        assertions=not no_assertions,
    )
    click.echo(result.render(), nl=False)
    if not result.passed:
        sys.exit(2)


@cli.command(name="roots")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
def roots_cmd(data: str) -> None:
    """Exact indicial roots of a spectral dataset, with multiplicities."""
    loaded = normalize_dataset(_load_json_file(data))
    roots = hodge_indicial_roots(loaded)
    for root, mult in roots:
        click.echo(f"root\t{root}\t{mult}")
    click.echo(f"count\t{sum(mult for _, mult in roots)}")
    click.echo(f"symmetric\t{'yes' if roots_symmetric(roots) else 'no'}")
    radius = gap_radius(roots)
    click.echo(f"radius\t{'unbounded' if radius is None else radius}")


@cli.command(name="check")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--profile", type=click.Choice(["int12b", "gs", "fine", "scale"]),
              default="int12b", show_default=True)
def check_cmd(data: str, profile: str) -> None:
    """Evaluate a spectral condition profile; exit 2 when it fails."""
    loaded = normalize_dataset(_load_json_file(data))
    if profile == "scale":
        t = scale_search(loaded)
        click.echo(f"scale\t{'impossible' if t is None else t}")
        if t is None:
            sys.exit(2)
        return
    checker = {"int12b": check_int12b, "gs": check_gs_comparison, "fine": check_fine}
    ok, details = checker[profile](loaded)
    for label, good in details:
        click.echo(f"CHECK\t{label}\t{'pass' if good else 'fail'}")
    click.echo(f"RESULT\t{'pass' if ok else 'fail'}")
    if not ok:
        sys.exit(2)


@cli.command(name="bessel")
@click.option("--alpha", type=float, required=True,
              help="Indicial rate; the probe equation uses alpha squared.")
@click.option("--kappa-max", type=float, default=20.0, show_default=True)
@click.option("--kappa-min", type=float, default=1e-3, show_default=True)
@click.option("--render", type=click.Path(dir_okay=False), default=None,
              help="Also draw the log-log decay plot to this image file.")
def bessel_cmd(alpha: float, kappa_max: float, kappa_min: float,
               render: Optional[str]) -> None:
    """Probe the model Bessel equation for square integrability near zero."""
    probe = bessel_l2_probe(alpha, kappa_max=kappa_max, kappa_min=kappa_min)
    click.echo(f"alpha\t{probe.alpha}")
    click.echo(f"fitted_exponent\t{probe.fitted_exponent:.6f}")
    click.echo(f"verdict\t{probe.verdict}")
    if render:
        reports.draw_bessel(probe, render)
        click.echo(f"wrote {render}", err=True)


@cli.command(name="golden")
@click.argument("names", nargs=-1)
def golden_cmd(names: Sequence[str]) -> None:
    """Recompute golden tables and compare byte-for-byte; exit 2 on mismatch."""
    known = set(catalog.golden_names()) | set(reports.golden_producers())
    resolved = [
        f"rule_{n}" if n not in known and f"rule_{n}" in known else n for n in names
    ]
    ok, lines = reports.compare_golden(resolved or None)
    for line in lines:
        click.echo(line)
    if not ok:
        sys.exit(2)


@cli.command(name="commutes")
@click.argument("space")
@click.argument("first")
@click.argument("second")
def commutes_cmd(space: str, first: str, second: str) -> None:
    """Report whether two recorded blow-ups can be swapped; exit 2 if unknown."""
    verdict = check_commutes(catalog.load_space(space), first, second)
    click.echo(str(verdict))
    if verdict.commutes is not True:
        sys.exit(2)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the exit code (console scripts pass it on)."""
    try:
        cli.main(args=argv, prog_name="cornerlab", standalone_mode=False)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0 if code is None else 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (SpaceError, RuleError, ReplayError, SpectralError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except KeyError as exc:
        click.echo(f"error: {exc.args[0] if exc.args else exc}", err=True)
        return 1
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
