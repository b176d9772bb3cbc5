# =================================================================
#
# Authors: Bernhard Mallinger <bernhard.mallinger@eox.at>
#
# Copyright (C) 2020 EOX IT Services GmbH <https://eox.at>
#
# Permission is hereby granted, free of charge, to any person
# obtaining a copy of this software and associated documentation
# files (the "Software"), to deal in the Software without
# restriction, including without limitation the rights to use,
# copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the
# Software is furnished to do so, subject to the following
# conditions:
#
# The above copyright notice and this permission notice shall be
# included in all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND,
# EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES
# OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND
# NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT
# HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY,
# WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING
# FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR
# OTHER DEALINGS IN THE SOFTWARE.
#
# =================================================================

"""Command line interface.

Exit codes: 0 for zero / equivalent / PASS / success, 1 for the opposite verdict,
2 for every error. ``--porcelain`` switches reports to stable key=value lines.
"""

import functools
import logging
from pathlib import Path
import sys
from typing import Callable, Optional, Sequence

import click
import galois

from .algebra import field
from .common import (
    RoabpError,
    RoabpFormatError,
    Settings,
    ceil_log2,
    check_budget,
    load_settings,
    variable_name,
)
from .concentration import (
    IsolationCertificate,
    WeightAssignment,
    concentration_bound,
    concentration_level,
    find_isolating,
    hitting_set,
    hitting_set_size,
    shift_by_weights,
    sum_width_bound,
    verify_isolating,
)
from .nisan import zero_witness
from .pit import check_equivalence, sum_zero_test
from .roabp_core import DensePoly, Roabp, ShiftTuple, coeff_operator, expand_dense
from .roabp_file import parse_roabp, parse_shift


LOGGER = logging.getLogger(__name__)


def format_monomial(a: Sequence[int]) -> str:
    parts = [
        variable_name(i) if e == 1 else f"{variable_name(i)}^{e}"
        for i, e in enumerate(a)
        if e
    ]
    return "*".join(parts) or "1"


def format_polynomial(p: DensePoly) -> str:
    """Scalar polynomial over F as text, terms in lexicographic exponent order."""
    terms = []
    for a, value in p.coeffs.items():
        c = int(value[0, 0])
        if not any(a):
            terms.append(str(c))
        elif c == 1:
            terms.append(format_monomial(a))
        else:
            terms.append(f"{c}*{format_monomial(a)}")
    return " + ".join(terms) or "0"


def format_exponent(a: Sequence[int]) -> str:
    return ",".join(str(e) for e in a)


def format_point(point: galois.FieldArray) -> str:
    return ",".join(str(int(v)) for v in point)


def parse_int_list(value: str, what: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise RoabpFormatError(
            f"expected comma separated integers: {value}", position=what
        ) from e


def parse_variables(value: str, n: int) -> list[int]:
    variables = []
    for part in value.split(","):
        name = part.strip()
        if not (name.startswith("x") and name[1:].isdigit() and 1 <= int(name[1:]) <= n):
            raise RoabpFormatError(f"unknown variable {name!r}", position="--y")
        variables.append(int(name[1:]) - 1)
    return variables


def report(porcelain: bool, lines: Sequence[tuple[str, str, str]]) -> None:
    """Each line is (porcelain key, human label, value)."""
    for key, label, value in lines:
        click.echo(f"{key}={value}" if porcelain else f"{label}: {value}")


def handle_errors(command: Callable) -> Callable:
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except RoabpError as e:
            click.echo(f"error: {e.user_msg}", err=True)
            sys.exit(e.exit_code)
        except Exception:
            LOGGER.exception("Unhandled error")
            sys.exit(2)

    return wrapper


def load_roabp(path: Path) -> Roabp:
    return parse_roabp(path.read_text(encoding="utf-8"), source=str(path))


def load_compatible(paths: Sequence[Path]) -> list[Roabp]:
    roabps = [load_roabp(path) for path in paths]
    moduli = {r.field.order for r in roabps}
    if len(moduli) > 1:
        raise RoabpFormatError(
            f"files use different moduli {sorted(moduli)}", position="header"
        )
    return roabps


porcelain_option = click.option(
    "--porcelain", is_flag=True, help="Print stable key=value lines."
)
roabp_path = click.Path(exists=True, dir_okay=False, path_type=Path)


@click.group()
@click.option("--config", type=roabp_path, default=None, help="YAML settings file.")
@click.option("--jobs", type=int, default=None, help="Worker threads.")
@click.option("--seed", type=int, default=None, help="Seed for randomized searches.")
@click.option("-v", "--verbose", count=True)
@click.pass_context
@handle_errors
def main(
    ctx: click.Context,
    config: Optional[Path],
    jobs: Optional[int],
    seed: Optional[int],
    verbose: int,
) -> None:
    logging.basicConfig(level=max(logging.WARNING - 10 * verbose, logging.DEBUG))
    settings = load_settings(config)
    overrides = {"jobs": jobs, "seed": seed}
    ctx.obj = Settings.from_dict(
        {
            **{name: getattr(settings, name) for name in settings.__dataclass_fields__},
            **{k: v for k, v in overrides.items() if v is not None},
        }
    )


@main.command()
@click.argument("path", type=roabp_path)
@porcelain_option
@click.pass_obj
@handle_errors
def zero(settings: Settings, path: Path, porcelain: bool) -> None:
    """Test whether one ROABP computes the zero polynomial."""
    r = load_roabp(path)
    witness = zero_witness(r)
    if witness is None:
        report(porcelain, [("verdict", "verdict", "zero")])
        sys.exit(0)
    report(
        porcelain,
        [
            ("verdict", "verdict", "nonzero"),
            ("witness", "nonzero coefficient at", format_exponent(witness)),
            ("monomial", "monomial", format_monomial(witness)),
        ],
    )
    sys.exit(1)


@main.command()
@click.argument("path_a", type=roabp_path)
@click.argument("path_b", type=roabp_path)
@porcelain_option
@click.pass_obj
@handle_errors
def equiv(settings: Settings, path_a: Path, path_b: Path, porcelain: bool) -> None:
    """Test whether two ROABPs compute the same polynomial."""
    a, b = load_compatible([path_a, path_b])
    result = check_equivalence(a, b, width_cap=settings.width_cap, jobs=settings.jobs)
    lines = [("verdict", "verdict", "equivalent" if result.equivalent else "different")]
    if result.failing_layer is not None and result.failing_dependency is not None:
        lines += [
            ("failing_layer", "failing layer", str(result.failing_layer)),
            (
                "failing_dependency",
                "failing dependency",
                format_exponent(result.failing_dependency),
            ),
        ]
    elif result.final_scalars is not None and not result.equivalent:
        lines.append(
            ("final_scalars", "final scalars", format_exponent(result.final_scalars))
        )
    report(porcelain, lines)
    sys.exit(0 if result.equivalent else 1)


@main.command("sum-zero")
@click.argument("paths", type=roabp_path, nargs=-1, required=True)
@porcelain_option
@click.pass_obj
@handle_errors
def sum_zero(settings: Settings, paths: Sequence[Path], porcelain: bool) -> None:
    """Test whether a sum of ROABPs is the zero polynomial."""
    summands = load_compatible(paths)
    is_zero = sum_zero_test(summands, width_cap=settings.width_cap, jobs=settings.jobs)
    report(
        porcelain,
        [
            ("summands", "summands", str(len(summands))),
            ("verdict", "verdict", "zero" if is_zero else "nonzero"),
        ],
    )
    sys.exit(0 if is_zero else 1)


@main.command("hitting-set")
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--d", "d", type=click.IntRange(min=1), required=True)
@click.option("--w", "w", type=click.IntRange(min=1), required=True)
@click.option("--c", "c", type=click.IntRange(min=1), required=True)
@click.option(
    "--support",
    type=click.IntRange(min=1),
    default=None,
    help="Force the support bound instead of c * l_{w,c}.",
)
@click.option("--shift-file", type=roabp_path, default=None)
@click.option("--t-count", type=click.IntRange(min=1), default=1)
@click.pass_obj
@handle_errors
def hitting_set_command(
    settings: Settings,
    n: int,
    d: int,
    w: int,
    c: int,
    support: Optional[int],
    shift_file: Optional[Path],
    t_count: int,
) -> None:
    """Print the shifted low-support hitting set, one point per line."""
    gf = field(settings.modulus)
    level = concentration_bound(w, d, c)
    bound = min(support if support is not None else c * level, n + 1)
    if shift_file is None:
        f = ShiftTuple.zero(gf, n)
    else:
        f = parse_shift(shift_file.read_text(encoding="utf-8"), gf, n, str(shift_file))

    size = hitting_set_size(n, d, bound, t_count)
    check_budget(size, settings.grid_budget, "hitting set")
    points = hitting_set(n, d, bound, f, range(t_count))
    click.echo(f"# width_bound={sum_width_bound(w, d, c)}")
    click.echo(f"# concentration={level}")
    click.echo(f"# support_bound={bound}")
    click.echo(f"# t_count={t_count}")
    click.echo(f"# size={size}")
    for point in points:
        click.echo(format_point(point))


@main.command("report-concentration")
@click.argument("path", type=roabp_path)
@click.option("--weights", required=True, help="Comma separated w_1,..,w_n.")
@porcelain_option
@click.pass_obj
@handle_errors
def report_concentration(
    settings: Settings, path: Path, weights: str, porcelain: bool
) -> None:
    """Check isolation and the concentration bound after shifting by t^w."""
    r = load_roabp(path)
    p = expand_dense(r, budget=settings.dense_budget)
    w = WeightAssignment(weights=tuple(parse_int_list(weights, "--weights")))
    verdict = verify_isolating(w, p)
    bound = ceil_log2(p.k + 1)
    before = concentration_level(p)
    after = concentration_level(shift_by_weights(p, w))

    if isinstance(verdict, IsolationCertificate):
        isolating = [
            ("isolating", "isolating", "yes"),
            ("basis", "basis S", ";".join(format_exponent(a) for a in verdict.basis)),
        ]
        passed = after <= bound
        check = "PASS" if passed else "FAIL"
    else:
        isolating = [
            ("isolating", "isolating", "no"),
            ("reason", "reason", f"{verdict.reason} {verdict.weight}"),
        ]
        passed = False
        check = "SKIP"

    report(
        porcelain,
        isolating
        + [
            ("level_before", "concentration before shift", str(before)),
            ("level_after", "concentration after shift", str(after)),
            ("bound", f"bound for k={p.k}", str(bound)),
            ("check", "check", check),
        ],
    )
    sys.exit(0 if passed else 1)


@main.command()
@click.argument("path", type=roabp_path)
@click.option("--y", "y", required=True, help="Comma separated variables, e.g. x1,x3.")
@click.option("--a", "a", required=True, help="Comma separated exponents of y.")
@porcelain_option
@click.pass_obj
@handle_errors
def coeff(settings: Settings, path: Path, y: str, a: str, porcelain: bool) -> None:
    """Print the coefficient operator A_(y^a) and the coefficient of y^a."""
    r = load_roabp(path)
    r.require_scalar("coeff")
    variables = parse_variables(y, r.n)
    exponent = parse_int_list(a, "--a")
    operator = expand_dense(coeff_operator(r, variables, exponent), settings.dense_budget)

    monomial: list[int] = [0] * r.n
    for var, e in zip(variables, exponent):
        monomial[var] = e
    name = format_monomial(monomial)
    report(
        porcelain,
        [
            ("operator", f"A_({name})", format_polynomial(operator)),
            ("coefficient", f"coeff_A({name})", str(int(operator.scalar((0,) * r.n)))),
        ],
    )


@main.command()
@click.argument("path", type=roabp_path)
@click.option("--bound", type=click.IntRange(min=1), default=None)
@click.option("--retries", type=click.IntRange(min=0), default=None)
@porcelain_option
@click.pass_obj
@handle_errors
def isolate(
    settings: Settings,
    path: Path,
    bound: Optional[int],
    retries: Optional[int],
    porcelain: bool,
) -> None:
    """Search for a basis isolating weight assignment."""
    p = expand_dense(load_roabp(path), budget=settings.dense_budget)
    w = find_isolating(
        p,
        bound or settings.weight_bound,
        seed=settings.seed,
        retries=settings.weight_retries if retries is None else retries,
        jobs=settings.jobs,
    )
    if w is None:
        report(porcelain, [("weights", "weights", "none")])
        sys.exit(1)
    report(porcelain, [("weights", "weights", format_exponent(w.weights))])


if __name__ == "__main__":
    main()
