"""Map method names to architectural components and tiers.

A catalog is an ordered rule list; the first matching rule wins.  Rules
pair a method-name pattern (same prefix grammar as instrumentation
filters) with a component name and a tier.  A component of ``*`` means
"derive from the method": use the simple name of the declaring class.
Methods no rule matches fall back to their declaring class in the Other
tier, so classification is total.

The built-in catalog describes a three-tier HR web application fronted
by JSP pages and servlets, with stateless session beans in the middle
and DAO classes on JDBC at the bottom; EJB container plumbing (dynamic
stubs, remote wrappers, ``com.sun.ejb``/``javax.ejb`` internals) is
grouped under a Middleware pseudo-component.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .filters import FilterPattern
from .metrics import HotSpotRow

DERIVE = "*"


class Tier(str, Enum):
    WEB = "web"
    BUSINESS = "business"
    DAO = "dao"
    MIDDLEWARE = "middleware"
    OTHER = "other"

    @property
    def label(self) -> str:
        return self.value.capitalize()


def declaring_class(method: str) -> str:
    """Simple name of the class declaring a fully qualified method.

    ``com.example.Foo.bar(int)`` -> ``Foo``; a bare name maps to itself.
    """
    head = method.split("(", 1)[0]
    parts = head.split(".")
    if len(parts) < 2:
        return head
    return parts[-2]


@dataclass(frozen=True)
class ComponentRule:
    pattern: FilterPattern
    component: str  # DERIVE means: use the declaring class simple name
    tier: Tier

    @classmethod
    def of(cls, pattern: str, component: str, tier: Tier) -> "ComponentRule":
        return cls(FilterPattern(pattern), component, tier)


@dataclass(frozen=True)
class ComponentCatalog:
    rules: tuple[ComponentRule, ...]

    def classify(self, method: str) -> tuple[str, Tier]:
        """Component and tier for a method; first matching rule wins.

        Unmatched methods map to (declaring class, Other).
        """
        for rule in self.rules:
            if rule.pattern.matches(method):
                component = rule.component
                if component == DERIVE:
                    component = declaring_class(method)
                return component, rule.tier
        return declaring_class(method), Tier.OTHER


@dataclass(frozen=True)
class ComponentUtilizationRow:
    component: str
    tier: Tier
    self_time: int
    utilization_pct: Fraction
    invocations: int


def component_utilization(rows: Iterable[HotSpotRow],
                          catalog: ComponentCatalog) -> list[ComponentUtilizationRow]:
    """Group a hot-spot table by component.

    Self time and invocations add up; the percentage denominator is the
    same total self time the hot-spot rows used, so component rows sum to
    100% exactly.  Sorted by descending self time, then component name.
    """
    acc: dict[tuple[str, Tier], list[int]] = {}
    denom = 0
    for row in rows:
        denom += row.self_time
        key = catalog.classify(row.method)
        cell = acc.get(key)
        if cell is None:
            cell = acc[key] = [0, 0]
        cell[0] += row.self_time
        cell[1] += row.invocations
    out = [
        ComponentUtilizationRow(
            component=component,
            tier=tier,
            self_time=self_ns,
            utilization_pct=Fraction(self_ns, denom) if denom else Fraction(0),
            invocations=inv,
        )
        for (component, tier), (self_ns, inv) in acc.items()
    ]
    out.sort(key=lambda r: (-r.self_time, r.component))
    return out


def default_hr_catalog() -> ComponentCatalog:
    """Catalog for the sample HR portal's package layout.

    Container plumbing is matched first so stub/wrapper classes do not
    leak into the Business tier; value-object constructors deliberately
    have no rule and fall through to Other.
    """
    rules = (
        # middleware first: stub/wrapper classes share the beans' package
        ComponentRule.of("com.sun.ejb.*", "EJBContainer", Tier.MIDDLEWARE),
        ComponentRule.of("javax.ejb.*", "EJBContainer", Tier.MIDDLEWARE),
        ComponentRule.of("com.mycompany.hr.process._EmployeeBeanRemoteRemote_DynamicStub.*",
                         "EJBContainer", Tier.MIDDLEWARE),
        ComponentRule.of("com.mycompany.hr.process._EmployeeBeanRemoteRemoteWrapper.*",
                         "EJBContainer", Tier.MIDDLEWARE),
        # data access classes, one component per DAO class
        ComponentRule.of("com.mycompany.hr.dao.*", DERIVE, Tier.DAO),
        # stateless session beans; Bean* also covers generated *BeanBean impls
        ComponentRule.of("com.mycompany.hr.process.EmployeeBeanBean*",
                         "EmployeeBean", Tier.BUSINESS),
        ComponentRule.of("com.mycompany.hr.process.InterviewResultsBean*",
                         "InterviewResultsBean", Tier.BUSINESS),
        ComponentRule.of("com.mycompany.hr.process.HRProcessBean*",
                         "HRProcessBean", Tier.BUSINESS),
        # web tier: compiled JSP pages and the servlet package
        ComponentRule.of("org.apache.jsp.*", DERIVE, Tier.WEB),
        ComponentRule.of("com.mycompany.hr.servlet.*", DERIVE, Tier.WEB),
        # one servlet class is deployed under the process package
        ComponentRule.of("com.mycompany.hr.process.HRProcessServlet.*",
                         "HRProcessServlet", Tier.WEB),
    )
    return ComponentCatalog(rules)


def load_catalog(lines: Iterable[str]) -> ComponentCatalog:
    """Parse a catalog file: ``tier TAB component TAB pattern`` per line.

    ``#`` comments and blank lines are ignored; rule order is file order.
    """
    rules = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"catalog line {lineno}: expected 3 tab-separated fields")
        tier_text, component, pattern = parts
        try:
            tier = Tier(tier_text.lower())
        except ValueError:
            valid = ", ".join(t.value for t in Tier)
            raise ValueError(
                f"catalog line {lineno}: unknown tier {tier_text!r} (expected {valid})"
            ) from None
        if not component:
            raise ValueError(f"catalog line {lineno}: empty component")
        rules.append(ComponentRule.of(pattern, component, tier))
    return ComponentCatalog(tuple(rules))


def load_catalog_file(path) -> ComponentCatalog:
    with open(path, "r", encoding="utf-8") as fh:
        return load_catalog(fh)


def dump_catalog(catalog: ComponentCatalog) -> str:
    lines = ["# tier\tcomponent\tpattern"]
    for rule in catalog.rules:
        lines.append(f"{rule.tier.value}\t{rule.component}\t{rule.pattern.text}")
    return "\n".join(lines) + "\n"
