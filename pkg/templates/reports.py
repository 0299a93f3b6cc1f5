"""
Report Templates for CLI Output
Text layouts for the price, verify, oracle and history commands
"""

from typing import Dict, List
from dataclasses import dataclass


@dataclass
class ReportTemplate:
    """Structure for report templates"""
    name: str
    header: str
    body: str
    description: str

    def format(self, **kwargs) -> str:
        """Format the report with provided variables"""
        return f"{self.header.format(**kwargs)}\n{self.body.format(**kwargs)}".rstrip() + "\n"


class ReportLibrary:
    """Collection of report templates for the CLI commands"""

    TEMPLATES: Dict[str, ReportTemplate] = {
        'price': ReportTemplate(
            name='price',
            header="Down-and-out call, moving barrier g(p) = K e^{{-r(T-p)}}",
            body="""  S             {S}
  p             {p}
  value         {value}
  region        {region}
  barrier level {barrier_level}
{greeks}""",
            description="Closed-form price with region and sensitivities",
        ),
        'verify': ReportTemplate(
            name='verify',
            header="Verification suite (alpha = {alpha}, r = {r}, sigma = {sigma})",
            body="""{rows}
  max residual  {max_residual}
  result        {status}""",
            description="Per-check residuals against tolerances",
        ),
        'oracle': ReportTemplate(
            name='oracle',
            header="Oracle comparison at S = {S}, p = {p}",
            body="""{table}
  result        {status}""",
            description="Analytic value against finite-difference and Monte Carlo estimates",
        ),
        'study': ReportTemplate(
            name='study',
            header="Crank-Nicolson convergence study (xi_max = {xi_max})",
            body="{table}",
            description="Max-norm error and observed order per grid",
        ),
        'history': ReportTemplate(
            name='history',
            header="Recorded runs ({count})",
            body="{rows}",
            description="Entries of the run ledger",
        ),
    }

    GREEKS_BLOCK = """  delta         {delta}
  gamma         {gamma}
  theta         {theta}"""

    @classmethod
    def get_template(cls, name: str) -> ReportTemplate:
        if name not in cls.TEMPLATES:
            raise KeyError(f"unknown report template '{name}'")
        return cls.TEMPLATES[name]

    @classmethod
    def render(cls, name: str, **kwargs) -> str:
        return cls.get_template(name).format(**kwargs)

    @classmethod
    def check_rows(cls, checks: List[Dict[str, str]]) -> str:
        """One aligned line per check: name, measured, tolerance, PASS/FAIL."""
        if not checks:
            return "  (no checks)"
        width = max(len(c['name']) for c in checks)
        return "\n".join(
            f"  {c['name']:<{width}}  {c['measured']:>12}  tol {c['tolerance']:>8}  {c['status']}"
            for c in checks
        )

    @staticmethod
    def indent(text: str, prefix: str = "  ") -> str:
        return "\n".join(prefix + line for line in text.splitlines())
