"""Registry of named starting fields with their known fixed points."""

from __future__ import annotations

from dataclasses import dataclass, field

from .fields import SampleConfig, VectorField
from .iterate import EquationSystem
from .lift import SpinorField
from .verify import SolutionTuple


@dataclass(frozen=True)
class Seed:
    name: str
    H0: tuple
    system: EquationSystem
    constants: dict = field(default_factory=dict)
    positive_domain: bool = False
    expected_H: tuple | None = None
    expected_A: tuple | None = None
    expected_psi: tuple | None = None
    sample: SampleConfig = field(default_factory=SampleConfig)
    node_budget: int | None = None
    note: str = ""

    @property
    def has_expected(self) -> bool:
        return self.expected_H is not None

    def field(self) -> VectorField:
        return VectorField.parse(self.H0, self.constants.keys())

    def expected_field(self) -> VectorField:
        return VectorField.parse(self.expected_H, self.constants.keys())

    def expected_tuple(self) -> SolutionTuple:
        """(H, psi, A, B) as transcribed, with B = s H."""
        if not (self.has_expected and self.expected_A and self.expected_psi):
            raise LookupError(f"seed {self.name} has no expected tuple")
        names = self.constants.keys()
        H = self.expected_field()
        psi = SpinorField(*VectorField.parse(self.expected_psi[:3], names).components,
                          VectorField.parse((self.expected_psi[3], "0", "0"), names).c1)
        A = VectorField.parse(self.expected_A, names)
        B = H if self.system.sign == 1 else H.map(lambda c: -c)
        return SolutionTuple(H, psi, A, B)


SW = EquationSystem.SEIBERG_WITTEN
FREUND = EquationSystem.FREUND
KAPPA = {"kappa": 1.0}


def _ex1(sign: str) -> Seed:
    s = "" if sign == "+" else "-"
    op = "+" if sign == "+" else "-"
    r = "sqrt(x^2 + y^2 + z^2)"
    return Seed(
        f"example1{sign}", (f"{s}x", f"{s}y", f"{s}z"), FREUND,
        expected_H=tuple(f"{s}{c}/(2*{r}^3)" for c in "xyz"),
        expected_A=(f"y/(2*{r}*({r} {op} z))", f"-x/(2*{r}*({r} {op} z))", "0"),
        expected_psi=(f"({r} {op} z)/(2*{r}*sqrt({r}*({r} {op} z)))", "0",
                      f"{s}x/(2*{r}*sqrt({r}*({r} {op} z)))", f"{s}y/(2*{r}*sqrt({r}*({r} {op} z)))"),
        note="monopole; final field parallel to the seed")


def _ex2(sign: str) -> Seed:
    s, t = ("", "-") if sign == "+" else ("-", "")
    return Seed(
        f"example2{sign}", (f"{s}sinh(kappa*y)", "0", "0"), SW, dict(KAPPA), True,
        expected_H=(f"{t}kappa^2/sinh(kappa*y)^2", "0", "0"),
        expected_A=("0", "0", f"{s}kappa*coth(kappa*y)"),
        expected_psi=("kappa/(sqrt(2)*sinh(kappa*y))", "0", f"{t}kappa/(sqrt(2)*sinh(kappa*y))", "0"),
        note="effectively one-dimensional")


def _ex2c(sign: str) -> Seed:
    s, t = ("", "-") if sign == "+" else ("-", "")
    return Seed(
        f"example2c{sign}", (f"{s}cosh(kappa*y)", "0", "0"), FREUND, dict(KAPPA), True,
        expected_H=(f"{t}kappa^2/cosh(kappa*y)^2", "0", "0"),
        expected_A=("0", "0", f"{s}kappa*tanh(kappa*y)"),
        expected_psi=("kappa/(sqrt(2)*cosh(kappa*y))", "0", f"{t}kappa/(sqrt(2)*cosh(kappa*y))", "0"),
        note="cosh seed; bounded one-dimensional field")


def _ex3(sign: str) -> Seed:
    s, t = ("", "-") if sign == "+" else ("-", "")
    return Seed(
        f"example3{sign}", (f"{s}x*y*z", "0", "0"), SW, positive_domain=True,
        expected_H=(f"{t}(1/y^2 + 1/z^2)", "0", "0"),
        expected_A=("0", f"{t}y^2/(z*(y^2 + z^2))", f"{s}z^2/(y*(y^2 + z^2))"),
        expected_psi=("sqrt(1/(2*y^2) + 1/(2*z^2))", "0", f"{t}sqrt(1/(2*y^2) + 1/(2*z^2))", "0"),
        note="planar; singular on the planes y = 0 and z = 0")


def _ex4(sign: str) -> Seed:
    s, t = ("", "-") if sign == "+" else ("-", "")
    rho = "sqrt(x^2 + y^2)"
    return Seed(
        f"example4{sign}", (f"{s}y", f"{t}x", "0"), SW,
        expected_H=(f"{t}y/(2*{rho}^3)", f"{s}x/(2*{rho}^3)", "0"),
        expected_A=("y/(2*(x^2 + y^2))", "-x/(2*(x^2 + y^2))", f"{s}1/(2*{rho})"),
        expected_psi=(f"1/(2*{rho})", "0", f"{t}y/(2*(x^2 + y^2))", f"{s}x/(2*(x^2 + y^2))"),
        note="axisymmetric; potential carries an Aharonov-Bohm term")


# A seed with no symmetry. Iterate sizes go 9, 83, 1395, 34136 (about 20x per
# step), so any budget is eventually exceeded; 5000 keeps the demonstration fast.
GENERIC = Seed("generic", ("x + y^2", "y*z + 1", "x*z"), SW, node_budget=5000,
               note="no closed form; expression size grows about 20x per step")

SEEDS = [
    *(_ex1(s) for s in "+-"),
    *(_ex2(s) for s in "+-"),
    *(_ex2c(s) for s in "+-"),
    *(_ex3(s) for s in "+-"),
    *(_ex4(s) for s in "+-"),
    GENERIC,
]
REGISTRY = {s.name: s for s in SEEDS}


def get_seed(name: str) -> Seed:
    """Look up a seed; a bare ``exampleN`` means the upper-sign branch."""
    key = name.strip().replace("−", "-")
    if key in REGISTRY:
        return REGISTRY[key]
    if key + "+" in REGISTRY:
        return REGISTRY[key + "+"]
    raise KeyError(f"unknown seed {name!r}; known: {', '.join(REGISTRY)}")
