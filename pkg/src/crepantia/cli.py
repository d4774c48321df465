"""Command line front end.

Exit codes: 0 success or crepant, 1 failed verification, 2 parse error or
malformed document, 3 precondition failure, 4 semi-unimodularity lost
during an iterated resolution, 5 cone limit exceeded, 10 obstructed,
11 undetermined.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Sequence

from .abelian import (
    NoAgeOneSystem,
    SemiUnimodularityLost,
    crepant_iterated,
    enumerate_group,
    iterated_fujiki_oka,
)
from .contfrac import (
    NotSemiUnimodular,
    crepant_by_ages,
    format_word,
    hj_expand,
    hj_rays,
    normal_forms,
    normalize,
    obstruction_scan,
    remainder_polynomial,
    rounddown_polynomial,
)
from .fan import (
    Cone,
    Fan,
    NotSmooth,
    ResolutionTranscript,
    ResourceLimitExceeded,
    fan_discrepancies,
    fujiki_oka_resolve,
    is_crepant,
    orthant,
    verify_resolution,
)
from .lattice import Overlattice, Point, ProperFraction, format_point, overlattice
from .oracle import first_existence_check

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_SEMI_UNIMODULARITY = 4
EXIT_RESOURCE = 5
EXIT_OBSTRUCTED = 10
EXIT_UNDETERMINED = 11

SCHEMA = "crepantia/1"
DEFAULT_MAX_CONES = 100_000


class SpecError(ValueError):
    pass


class DocumentError(ValueError):
    pass


# -- group specs --------------------------------------------------------------

_FRACTION = re.compile(r"^\+?1/(\d+)\(([+-]?\d+(?:,[+-]?\d+)*)\)$")
_PAIR = re.compile(r"^\+?(\d+)/\+?(\d+)$")


@dataclass(frozen=True)
class GroupSpec:
    """Generators written as ``1/r(a_1,...,a_n)`` joined by ``;``."""

    generators: tuple[ProperFraction, ...]

    @classmethod
    def parse(cls, text: str) -> GroupSpec:
        parts = [re.sub(r"\s+", "", p) for p in text.split(";")]
        parts = [p for p in parts if p]
        if not parts:
            raise SpecError("empty group spec")
        gens = []
        for part in parts:
            m = _FRACTION.match(part)
            if not m:
                raise SpecError(f"cannot parse {part!r}; expected 1/r(a1,...,an)")
            r = int(m.group(1))
            if r == 0 or r >= 2 ** 63:
                raise SpecError(f"denominator {r} out of range")
            gens.append(ProperFraction(tuple(int(a) for a in m.group(2).split(",")), r))
        if len({len(g) for g in gens}) != 1:
            raise SpecError("generators have different lengths")
        return cls(tuple(gens))

    @property
    def rank(self) -> int:
        return len(self.generators[0])

    @property
    def is_cyclic(self) -> bool:
        return len(self.generators) == 1

    def __str__(self):
        return ";".join(str(g) for g in self.generators)


def parse_pair(text: str) -> tuple[int, int]:
    m = _PAIR.match(re.sub(r"\s+", "", text))
    if not m:
        raise SpecError(f"cannot parse {text!r}; expected r/a")
    return int(m.group(1)), int(m.group(2))


# -- fan documents ------------------------------------------------------------

def _encode_point(p: Sequence[Fraction]) -> dict:
    d = 1
    for c in p:
        d = d * Fraction(c).denominator // gcd(d, Fraction(c).denominator)
    return {"denominator": str(d), "numerators": [str(int(c * d)) for c in p]}


def _decode_point(obj) -> Point:
    d = int(obj["denominator"])
    if d <= 0:
        raise DocumentError("denominators must be positive")
    return tuple(Fraction(int(a), d) for a in obj["numerators"])


@dataclass
class FanDocument:
    rank: int
    lattice: list[ProperFraction]
    root: list[Point]
    rays: list[Point]
    cones: list[list[int]]
    discrepancies: list[Fraction | None]
    crepant: bool
    transcript: list[dict] | None = None

    @classmethod
    def from_fan(cls, fan: Fan, generators: Sequence[ProperFraction], root: Cone,
                 transcript: ResolutionTranscript | None = None) -> FanDocument:
        rays = fan.rays
        index = {r: k for k, r in enumerate(rays)}
        disc = fan_discrepancies(fan)
        entries = None
        if transcript is not None:
            entries = [{"word": format_word(w), "type": str(node.type),
                        "center": _encode_point(node.center)}
                       for w, node in transcript.nodes.items()]
        return cls(
            rank=fan.lattice.rank,
            lattice=list(generators),
            root=list(root.rays),
            rays=rays,
            cones=[[index[r] for r in c.rays] for c in fan.cones],
            discrepancies=[disc.get(r) for r in rays],
            crepant=is_crepant(fan),
            transcript=entries,
        )

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "rank": self.rank,
            "lattice": [{"denominator": str(g.denominator),
                         "numerators": [str(a) for a in g.numerators]} for g in self.lattice],
            "root": [_encode_point(r) for r in self.root],
            "rays": [_encode_point(r) for r in self.rays],
            "cones": self.cones,
            "discrepancies": [None if d is None else str(d) for d in self.discrepancies],
            "crepant": self.crepant,
        }
        if self.transcript is not None:
            out["transcript"] = self.transcript
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> FanDocument:
        try:
            data = json.loads(text)
            if data.get("schema") != SCHEMA:
                raise DocumentError(f"unknown schema {data.get('schema')!r}")
            rank = int(data["rank"])
            lattice = [ProperFraction(tuple(int(a) for a in g["numerators"]), int(g["denominator"]))
                       for g in data["lattice"]]
            root = [_decode_point(r) for r in data["root"]]
            rays = [_decode_point(r) for r in data["rays"]]
            cones = [[int(k) for k in c] for c in data["cones"]]
            disc = [None if d is None else Fraction(d) for d in data["discrepancies"]]
            crepant = data["crepant"]
            transcript = data.get("transcript")
        except DocumentError:
            raise
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise DocumentError(f"malformed fan document: {exc}") from None
        if not isinstance(crepant, bool):
            raise DocumentError("'crepant' must be a boolean")
        if any(len(p) != rank for p in root + rays) or any(len(g) != rank for g in lattice):
            raise DocumentError("point length does not match rank")
        if len(disc) != len(rays) or any(k < 0 or k >= len(rays) for c in cones for k in c):
            raise DocumentError("cone or discrepancy indices out of range")
        return cls(rank, lattice, root, rays, cones, disc, crepant, transcript)

    def overlattice(self) -> Overlattice:
        return overlattice(self.lattice, self.rank)

    def fan(self) -> Fan:
        return Fan(self.overlattice(), [Cone(tuple(self.rays[k] for k in c)) for c in self.cones])


def audit_document(doc: FanDocument) -> list[str]:
    """Re-run every check from the document alone; returns failure messages."""
    try:
        fan = doc.fan()
    except ValueError as exc:
        return [str(exc)]
    lattice = doc.overlattice()
    failures = list(verify_resolution(fan, lattice, Cone(tuple(doc.root))).failures)
    if failures:
        return failures
    try:
        disc = fan_discrepancies(fan, lattice)
        crepant = is_crepant(fan, lattice)
    except (NotSmooth, ValueError) as exc:
        return [str(exc)]
    for ray, stored in zip(doc.rays, doc.discrepancies):
        if disc.get(ray) != stored:
            failures.append(f"discrepancy of {format_point(ray)} is {disc.get(ray)}, "
                            f"document says {stored}")
    if crepant != doc.crepant:
        failures.append(f"crepancy failure: fan is {'' if crepant else 'not '}crepant, "
                        f"document says {doc.crepant}")
    return failures


# -- SVG ---------------------------------------------------------------------

_SVG_SIZE = 400
_MARGIN = 20


def _project(p: Point) -> tuple[int, int]:
    s = sum(p)
    w = _SVG_SIZE - 2 * _MARGIN
    corners = [(_MARGIN, _MARGIN + w), (_MARGIN + w, _MARGIN + w), (_MARGIN + w // 2, _MARGIN)]
    x = sum(c / s * v[0] for c, v in zip(p, corners))
    y = sum(c / s * v[1] for c, v in zip(p, corners))
    return round(x), round(y)


def render_svg(doc: FanDocument) -> str:
    """Junior-simplex picture of a rank-3 fan (barycentric projection)."""
    if doc.rank != 3:
        raise ValueError("SVG export needs rank 3")
    pts = [_project(r) for r in doc.rays]
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_SIZE}" '
             f'height="{_SVG_SIZE}" viewBox="0 0 {_SVG_SIZE} {_SVG_SIZE}">']
    for cone in doc.cones:
        coords = " ".join(f"{pts[k][0]},{pts[k][1]}" for k in cone)
        lines.append(f'  <polygon points="{coords}" fill="none" stroke="black" stroke-width="1"/>')
    for k, (x, y) in enumerate(pts):
        fill = "black" if doc.discrepancies[k] in (None, 0) else "red"
        lines.append(f'  <circle cx="{x}" cy="{y}" r="3" fill="{fill}">'
                     f"<title>{format_point(doc.rays[k])}</title></circle>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- shared computations -----------------------------------------------------

def _max_cones() -> int:
    return int(os.environ.get("CREPANTIA_MAX_CONES", DEFAULT_MAX_CONES))


def _is_gorenstein(spec: GroupSpec) -> bool:
    return all(g.age.denominator == 1 for g in spec.generators)


def _semi_isolated(spec: GroupSpec) -> bool:
    return spec.is_cyclic and bool(normal_forms(spec.generators[0]))


@dataclass
class Verdict:
    code: int
    verdict: str
    witness: str
    cones: int
    max_discrepancy: Fraction | None

    def label(self) -> str:
        return {EXIT_OK: "crepant", EXIT_OBSTRUCTED: "obstructed",
                EXIT_UNDETERMINED: "undetermined"}.get(self.code, self.verdict)


def _max_disc(fan: Fan) -> Fraction | None:
    values = list(fan_discrepancies(fan).values())
    return max(values) if values else None


def decide(spec: GroupSpec, max_cones: int | None = None) -> Verdict:
    """Crepancy verdict for a Gorenstein spec (see ``check``)."""
    n = spec.rank
    lattice = overlattice(spec.generators, n)
    if _semi_isolated(spec):
        g = spec.generators[0]
        forms = normal_forms(g)
        for nf in forms:
            if crepant_by_ages(nf.fraction).crepant:
                fan, _ = fujiki_oka_resolve(orthant(n), nf.apex, lattice, max_cones)
                return Verdict(EXIT_OK, f"crepant FO over e{nf.apex + 1}", "",
                               len(fan), _max_disc(fan))
        first_fan, _ = fujiki_oka_resolve(orthant(n), forms[0].apex, lattice, max_cones)
        for nf in forms:
            report = obstruction_scan(nf.fraction)
            if report.obstructed:
                ob = report.obstructions[0]
                return Verdict(EXIT_OBSTRUCTED, f"obstructed ({ob.kind})",
                               f"{nf.fraction} {format_word(ob.word)}: {ob.coefficient} "
                               f"age {ob.coefficient.age}", len(first_fan), _max_disc(first_fan))
        v = crepant_by_ages(forms[0].fraction)
        witness = f"{forms[0].fraction} {format_word(v.witness)}: {v.coefficient} age {v.coefficient.age}"
    else:
        group = enumerate_group(spec.generators, n)
        try:
            verdict = crepant_iterated(group, max_cones=max_cones)
            first_fan = verdict.fan
        except NoAgeOneSystem as exc:
            first_fan, witness = None, str(exc)
        else:
            if verdict.crepant:
                return Verdict(EXIT_OK, "crepant iterated FO", "", len(first_fan),
                               _max_disc(first_fan))
            witness = f"stage coefficient {verdict.witness} age {verdict.witness.age}"
    count = len(first_fan) if first_fan else 0
    disc = _max_disc(first_fan) if first_fan else None
    if not first_existence_check(lattice):
        return Verdict(EXIT_OBSTRUCTED, "obstructed (hilbert basis)",
                       "Hilbert basis has a non-junior element", count, disc)
    return Verdict(EXIT_UNDETERMINED, "undetermined", witness, count, disc)


# -- commands ----------------------------------------------------------------

def cmd_hj(args) -> int:
    r, a = parse_pair(args.fraction)
    try:
        exp = hj_expand(r, a)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(exp)
    rays = hj_rays(r, a)
    for i, x in enumerate(exp.coefficients, start=1):
        print(f"v{i}  {format_point(rays[i])}  E{i}^2 = {-x}")
    return EXIT_OK


def _normal_or_fail(spec: GroupSpec, allow_power: bool):
    if not spec.is_cyclic:
        raise SpecError("this command needs a single generator")
    try:
        return normalize(spec.generators[0], allow_power)
    except NotSemiUnimodular as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def _print_normal_note(spec: GroupSpec, nf) -> None:
    if nf.fraction != spec.generators[0]:
        print(f"# normal form {nf.fraction} (slots {','.join(str(k + 1) for k in nf.permutation)})")


def cmd_rpoly(args) -> int:
    spec = GroupSpec.parse(args.spec)
    nf = _normal_or_fail(spec, allow_power=False)
    if nf is None:
        return EXIT_PRECONDITION
    _print_normal_note(spec, nf)
    for word, coeff in remainder_polynomial(nf.fraction).items():
        print(f"{format_word(word)}: {coeff}")
    return EXIT_OK


def cmd_zpoly(args) -> int:
    spec = GroupSpec.parse(args.spec)
    nf = _normal_or_fail(spec, allow_power=False)
    if nf is None:
        return EXIT_PRECONDITION
    _print_normal_note(spec, nf)
    for word, vec in rounddown_polynomial(nf.fraction, terminal=args.terminal).items():
        print(f"{format_word(word)}: ({','.join(map(str, vec))})")
    return EXIT_OK


def cmd_resolve(args) -> int:
    spec = GroupSpec.parse(args.spec)
    n = spec.rank
    root = orthant(n)
    transcript = None
    try:
        if args.iterated:
            group = enumerate_group(spec.generators, n)
            if not group.is_gorenstein:
                print("error: iterated resolutions need a Gorenstein group", file=sys.stderr)
                return EXIT_PRECONDITION
            chain = GroupSpec.parse(args.chain).generators if args.chain else None
            try:
                fan, _ = iterated_fujiki_oka(group, chain, max_cones=_max_cones())
            except ValueError as exc:
                if isinstance(exc, NoAgeOneSystem):
                    raise
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_PRECONDITION
        else:
            if not spec.is_cyclic:
                print("error: several generators need --iterated", file=sys.stderr)
                return EXIT_PRECONDITION
            nf = _normal_or_fail(spec, allow_power=True)
            if nf is None:
                return EXIT_PRECONDITION
            lattice = overlattice(spec.generators, n)
            fan, transcript = fujiki_oka_resolve(root, nf.apex, lattice, _max_cones())
    except NoAgeOneSystem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SemiUnimodularityLost as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMI_UNIMODULARITY
    except ResourceLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    doc = FanDocument.from_fan(fan, spec.generators, root, transcript)
    smooth = verify_resolution(fan, fan.lattice, root).ok
    disc = [d for d in doc.discrepancies if d is not None]
    print(f"cones: {len(fan)}")
    print(f"smooth: {'yes' if smooth else 'no'}")
    print(f"crepant: {'yes' if doc.crepant else 'no'}")
    print(f"discrepancy range: [{min(disc)}, {max(disc)}]" if disc else "discrepancy range: none")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc.to_json())
    if args.svg:
        if n != 3:
            print("note: SVG export needs rank 3; skipped", file=sys.stderr)
        else:
            with open(args.svg, "w") as fh:
                fh.write(render_svg(doc))
    return EXIT_OK


def cmd_check(args) -> int:
    spec = GroupSpec.parse(args.spec)
    if not _is_gorenstein(spec):
        print("error: check needs a Gorenstein group (integer ages)", file=sys.stderr)
        return EXIT_PRECONDITION
    try:
        v = decide(spec, _max_cones())
    except ResourceLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SemiUnimodularityLost as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMI_UNIMODULARITY
    print(v.verdict)
    if v.witness:
        print(f"witness: {v.witness}")
    return v.code


def cmd_verify(args) -> int:
    try:
        with open(args.document) as fh:
            doc = FanDocument.from_json(fh.read())
    except (OSError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    failures = audit_document(doc)
    for f in failures:
        print(f"FAIL {f}")
    if failures:
        return EXIT_FAILED
    print(f"ok: {len(doc.cones)} cones, {'crepant' if doc.crepant else 'not crepant'}")
    return EXIT_OK


def cyclic_types(n: int, max_order: int) -> list[ProperFraction]:
    """Gorenstein cyclic groups of rank ``n``, one per class up to
    coordinate permutation and choice of generator (sorted entries)."""
    out = []
    for r in range(2, max_order + 1):
        units = [k for k in range(1, r) if gcd(k, r) == 1]
        seen = set()
        for tail in product(range(r), repeat=n - 1):
            nums = (1,) + tail
            if sum(nums) % r:
                continue
            g = ProperFraction(nums, r)
            if g.denominator != r:
                continue
            key = min(tuple(sorted((k * a) % r for a in nums)) for k in units)
            if key in seen:
                continue
            seen.add(key)
            out.append(ProperFraction(key, r))
    # groups without any unit entry are not reached from a leading 1
    for r in range(2, max_order + 1):
        units = [k for k in range(1, r) if gcd(k, r) == 1]
        for nums in product(range(r), repeat=n):
            if sum(nums) % r or any(a and gcd(a, r) == 1 for a in nums):
                continue
            if list(nums) != sorted(nums):
                continue
            g = ProperFraction(nums, r)
            if g.denominator != r:
                continue
            key = min(tuple(sorted((k * a) % r for a in nums)) for k in units)
            if key == nums:
                out.append(g)
    return sorted(out, key=lambda g: (g.denominator, g.numerators))


def _sweep_row(g: ProperFraction) -> dict:
    spec = GroupSpec((g,))
    try:
        v = decide(spec, _max_cones())
    except ResourceLimitExceeded:
        return {"spec": str(g), "error": "resource"}
    return {
        "spec": str(g),
        "order": g.denominator,
        "dim": len(g),
        "verdict": v.label(),
        "witness": v.witness,
        "cones": v.cones,
        "max_discrepancy": "" if v.max_discrepancy is None else str(v.max_discrepancy),
    }


SWEEP_COLUMNS = ["spec", "order", "dim", "verdict", "witness", "cones", "max_discrepancy"]


def cmd_sweep(args) -> int:
    if args.dim not in (2, 3, 4, 5):
        print("error: --dim must be 2, 3, 4 or 5", file=sys.stderr)
        return EXIT_PRECONDITION
    if not 2 <= args.max_order <= 512:
        print("error: --max-order must lie in 2..512", file=sys.stderr)
        return EXIT_PRECONDITION
    types = cyclic_types(args.dim, args.max_order)
    out = open(args.report, "w", newline="") if args.report else sys.stdout
    code = EXIT_OK
    try:
        writer = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                rows = pool.map(_sweep_row, types, chunksize=8)
                code = _write_rows(writer, rows)
        else:
            code = _write_rows(writer, map(_sweep_row, types))
    finally:
        if out is not sys.stdout:
            out.close()
    return code


def _write_rows(writer, rows) -> int:
    for row in rows:
        if "error" in row:
            print(f"error: cone limit exceeded at {row['spec']}; report is partial",
                  file=sys.stderr)
            return EXIT_RESOURCE
        writer.writerow(row)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crepantia",
                                     description="Fujiki-Oka resolutions of quotient singularities")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hj", help="Hirzebruch-Jung continued fraction of r/a")
    p.add_argument("fraction", help="r/a, e.g. 11/8")
    p.set_defaults(func=cmd_hj)

    p = sub.add_parser("rpoly", help="remainder polynomial")
    p.add_argument("spec")
    p.set_defaults(func=cmd_rpoly)

    p = sub.add_parser("zpoly", help="round-down polynomial")
    p.add_argument("spec")
    p.add_argument("--terminal", action="store_true",
                   help="keep terms whose trailing entry is 1")
    p.set_defaults(func=cmd_zpoly)

    p = sub.add_parser("resolve", help="build a Fujiki-Oka resolution")
    p.add_argument("spec")
    p.add_argument("--iterated", action="store_true")
    p.add_argument("--chain", help="stage generators for --iterated, first stage first")
    p.add_argument("--out", help="write the fan as JSON")
    p.add_argument("--svg", help="write a junior simplex picture (rank 3)")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("check", help="decide crepancy")
    p.add_argument("spec")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="audit a fan document")
    p.add_argument("document")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="batch verdicts over cyclic groups")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--max-order", type=int, required=True)
    p.add_argument("--report", help="CSV path (default stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
