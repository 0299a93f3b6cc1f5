# src/cli.py

"""
Command-Line Interface
Subcommands: price, verify, oracle, emit, history.

Exit codes: 0 success, 1 failed check or oracle disagreement, 2 usage or
validation error. Settings resolve as flags > config file > defaults; the
config file is a flat KEY=value file given by --config or the
BARRIER_PRICER_CONFIG environment variable.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import plotly.graph_objects as go

from config import config
from src.analytic_pricer import PriceQuery, default_spot_grid, greeks, price, price_surface
from src.coordinate_transform import MarketParams
from src.database import get_database
from src.errors import ConfigValidationError, PricingError
from src.fd_oracle import GridSpec, convergence_study, solve
from src.mc_oracle import McConfig, batch_frame, discrete_vs_bridge, simulate
from src.verification import market_for_alpha, oracle_comparison, run_suite
from templates.reports import ReportLibrary
from utils.helpers import (
    ensure_directory_exists,
    export_frame_to_csv,
    export_to_json,
    format_number,
    format_record,
    format_table,
    load_config_file,
    parse_int_list,
    parse_sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

# flag name -> (config-file key, parameter name used in messages, default)
MARKET_FIELDS = {
    'rate': ('rate', 'r', config.DEFAULT_RATE),
    'vol': ('vol', 'sigma', config.DEFAULT_VOL),
    'strike': ('strike', 'K', config.DEFAULT_STRIKE),
    'maturity': ('maturity', 'T', config.DEFAULT_MATURITY),
}


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors raise instead of exiting."""

    def error(self, message):
        raise ConfigValidationError(f"{self.prog}: {message}")


# ===== SETTINGS RESOLUTION =====

def _settings(args: argparse.Namespace) -> Dict[str, Any]:
    return load_config_file(config.get_config_file(getattr(args, 'config', None)))


def _resolve(args: argparse.Namespace, settings: Dict[str, Any], name: str, default: Any = None) -> Any:
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in settings:
        return settings[name]
    return default


def resolve_market(args: argparse.Namespace, settings: Dict[str, Any], require: bool = False) -> MarketParams:
    """MarketParams from flags, then config file, then defaults (unless require)."""
    values = {}
    for flag, (key, label, default) in MARKET_FIELDS.items():
        value = _resolve(args, settings, key)
        if value is None:
            if require:
                raise ConfigValidationError(
                    f"{label} is required: pass --{flag} or set '{key}' in the config file"
                )
            value = default
        values[label] = value
    return MarketParams(r=values['r'], sigma=values['sigma'], K=values['K'], T=values['T'])


def _market_record(m: MarketParams) -> Dict[str, float]:
    return {'r': m.r, 'sigma': m.sigma, 'K': m.K, 'T': m.T}


def _record(args: argparse.Namespace, command: str, parameters: Dict, results: Dict, passed: bool) -> None:
    if not (getattr(args, 'record', False) or config.RECORD_RUNS):
        return
    try:
        get_database().record_run(command, parameters, results, passed)
    except Exception as e:
        logger.warning(f"Could not record {command} run: {e}")


def _emit(args: argparse.Namespace, text: str, payload: Dict[str, Any]) -> None:
    if getattr(args, 'format', 'text') == 'json':
        print(export_to_json(payload))
    else:
        print(text, end='')


# ===== COMMANDS =====

def cmd_price(args: argparse.Namespace) -> int:
    settings = _settings(args)
    m = resolve_market(args, settings, require=True)
    spot = _resolve(args, settings, 'spot')
    if spot is None:
        raise ConfigValidationError("S is required: pass --spot or set 'spot' in the config file")
    p = _resolve(args, settings, 'time', config.DEFAULT_TIME)

    query = PriceQuery(S=spot, p=p)
    result = price(query, m, rtol=config.CLI_BARRIER_RTOL)
    record = {'S': spot, 'p': p, 'value': result.value, 'region': result.region.value,
              'barrier_level': result.barrier_level}
    if not result.knocked_out:
        g = greeks(query, m, rtol=config.CLI_BARRIER_RTOL)
        record.update({'delta': g.delta, 'gamma': g.gamma, 'theta': g.theta})

    fp = args.full_precision
    if args.format == 'csv':
        frame = price_surface([spot], [p], m, include_barrier=False, rtol=config.CLI_BARRIER_RTOL)
        if args.output:
            export_frame_to_csv(frame, args.output)
        else:
            print(frame.to_csv(index=False, lineterminator="\n"), end='')
    else:
        greeks_text = (
            ReportLibrary.GREEKS_BLOCK.format(**format_record(
                {k: record[k] for k in ('delta', 'gamma', 'theta')}, fp))
            if 'delta' in record else "  greeks        n/a (knocked out)"
        )
        text = ReportLibrary.render(
            'price',
            S=format_number(spot, fp), p=format_number(p, fp),
            value=format_number(result.value, fp), region=result.region.value,
            barrier_level=format_number(result.barrier_level, fp), greeks=greeks_text,
        )
        _emit(args, text, {'market': _market_record(m), **record})

    _record(args, 'price', {**_market_record(m), 'S': spot, 'p': p}, record, True)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    settings = _settings(args)
    base = resolve_market(args, settings)
    tolerance = _resolve(args, settings, 'tolerance')
    seed = _resolve(args, settings, 'seed', config.VERIFY_SEED)

    markets = [market_for_alpha(a, base) for a in parse_sweep(args.alpha_sweep)] if args.alpha_sweep else [base]
    fp = args.full_precision
    reports = [run_suite(m, tolerance=tolerance, seed=seed, only=args.check) for m in markets]

    texts, payload = [], []
    for report in reports:
        rows = ReportLibrary.check_rows([
            {'name': c.name, 'measured': format_number(c.measured, fp),
             'tolerance': format_number(c.tolerance), 'status': 'PASS' if c.passed else 'FAIL'}
            for c in report.checks
        ])
        texts.append(ReportLibrary.render(
            'verify', alpha=format_number(report.alpha, fp), r=format_number(report.market.r, fp),
            sigma=format_number(report.market.sigma, fp), rows=rows,
            max_residual=format_number(report.max_residual, fp),
            status='PASS' if report.passed else f"FAIL ({len(report.failures)} checks)",
        ))
        payload.append({
            'alpha': report.alpha, 'market': _market_record(report.market), 'passed': report.passed,
            'max_residual': report.max_residual, 'notes': report.notes,
            'checks': report.to_frame().to_dict(orient='records'),
        })
    if reports and args.format != 'json':
        texts.append("Notes:\n" + "\n".join(f"  - {n}" for n in reports[0].notes) + "\n")

    passed = all(r.passed for r in reports)
    _emit(args, "\n".join(texts), {'passed': passed, 'reports': payload})
    _record(args, 'verify', {**_market_record(base), 'alpha_sweep': args.alpha_sweep, 'tolerance': tolerance},
            {'max_residual': max(r.max_residual for r in reports)}, passed)
    return EXIT_OK if passed else EXIT_FAILED


def _grid(args: argparse.Namespace, settings: Dict[str, Any]) -> GridSpec:
    return GridSpec(
        xi_max=_resolve(args, settings, 'xi_max', config.FD_XI_MAX),
        n_space=_resolve(args, settings, 'n_space', config.FD_N_SPACE),
        n_time=_resolve(args, settings, 'n_time', config.FD_N_TIME),
    )


def _mc_config(args: argparse.Namespace, settings: Dict[str, Any]) -> McConfig:
    return McConfig(
        n_paths=_resolve(args, settings, 'paths', config.MC_PATHS),
        n_steps=_resolve(args, settings, 'steps', config.MC_STEPS),
        seed=_resolve(args, settings, 'seed', config.MC_SEED),
        bridge_correction=not args.no_bridge,
        binary_killing=args.binary_killing,
        workers=args.workers or config.MC_WORKERS,
    )


def cmd_oracle(args: argparse.Namespace) -> int:
    settings = _settings(args)
    m = resolve_market(args, settings)
    fp = args.full_precision

    if args.study:
        sizes = parse_int_list(args.grids) if args.grids else config.FD_STUDY_GRIDS
        xi_max = _resolve(args, settings, 'xi_max', config.FD_XI_MAX)
        frame = convergence_study(m, [GridSpec(xi_max=xi_max, n_space=n, n_time=n) for n in sizes])
        text = ReportLibrary.render('study', xi_max=format_number(xi_max, fp),
                                    table=ReportLibrary.indent(format_table(frame, fp)))
        _emit(args, text, {'market': _market_record(m), 'study': frame.to_dict(orient='records')})
        _record(args, 'oracle', {**_market_record(m), 'study': sizes}, {'study': frame.to_dict(orient='records')}, True)
        return EXIT_OK

    spot = _resolve(args, settings, 'spot', config.DEFAULT_SPOT)
    p = _resolve(args, settings, 'time', config.DEFAULT_TIME)
    mc_cfg = _mc_config(args, settings) if args.mode in ('mc', 'both') else None
    frame = oracle_comparison(spot, p, m, args.mode, grid=_grid(args, settings), mc_config=mc_cfg)
    agreed = bool(frame['agreed'].all())

    text = ReportLibrary.render(
        'oracle', S=format_number(spot, fp), p=format_number(p, fp),
        table=ReportLibrary.indent(format_table(frame, fp)),
        status='agree' if agreed else 'DISAGREE',
    )
    payload = {'market': _market_record(m), 'S': spot, 'p': p, 'agreed': agreed,
               'rows': frame.to_dict(orient='records')}

    if args.compare_monitoring and mc_cfg is not None:
        comparison = discrete_vs_bridge(spot, m, mc_cfg)
        text += "Discrete vs bridge monitoring\n" + ReportLibrary.indent(format_table(comparison, fp)) + "\n"
        payload['monitoring'] = comparison.to_dict(orient='records')

    _emit(args, text, payload)
    _record(args, 'oracle', {**_market_record(m), 'S': spot, 'p': p, 'mode': args.mode},
            {'rows': frame.to_dict(orient='records')}, agreed)
    return EXIT_OK if agreed else EXIT_FAILED


def surface_figure(m: MarketParams, n_spots: int, n_times: int) -> go.Figure:
    """Interactive surface of the closed-form price over (S, p)."""
    frame = price_surface(
        default_spot_grid(m, n_spots), np.linspace(0.0, m.T, n_times), m,
        include_barrier=False, rtol=config.CLI_BARRIER_RTOL,
    )
    grid = frame.pivot(index='p', columns='S', values='V')
    figure = go.Figure(go.Surface(x=grid.columns.values, y=grid.index.values, z=grid.values, colorscale='Viridis'))
    figure.update_layout(
        title=f"Down-and-out call, r={m.r}, sigma={m.sigma}, K={m.K}, T={m.T}",
        scene=dict(xaxis_title='S', yaxis_title='p', zaxis_title='V'),
    )
    return figure


def cmd_emit(args: argparse.Namespace) -> int:
    settings = _settings(args)
    m = resolve_market(args, settings)
    out_dir = ensure_directory_exists(args.output or _resolve(args, settings, 'output', config.OUTPUT_DIR))
    written: List[Path] = []
    what = set(args.what or ['surface'])
    if 'all' in what:
        what = {'surface', 'fd', 'mc'}

    if 'surface' in what:
        spots = default_spot_grid(m, args.spots)
        times = np.linspace(0.0, m.T, args.times or config.SURFACE_TIMES)
        frame = price_surface(spots, times, m, rtol=config.CLI_BARRIER_RTOL)
        written.append(export_frame_to_csv(frame, out_dir / 'surface.csv'))
    if 'fd' in what:
        written.append(solve(m, _grid(args, settings)).dump_csv(out_dir / 'fd_grid.csv'))
    if 'mc' in what:
        spot = _resolve(args, settings, 'spot', config.DEFAULT_SPOT)
        estimate = simulate(spot, m, _mc_config(args, settings))
        written.append(export_frame_to_csv(batch_frame(estimate), out_dir / 'mc_batches.csv'))
    if args.plot:
        target = out_dir / 'surface.html'
        try:
            surface_figure(m, args.spots or config.SURFACE_SPOTS, args.times or config.SURFACE_TIMES).write_html(str(target))
        except OSError as e:
            raise OSError(f"could not write figure to {target}: {e}") from e
        written.append(target)

    _emit(args, "".join(f"wrote {path}\n" for path in written), {'written': [str(p) for p in written]})
    _record(args, 'emit', {**_market_record(m), 'what': sorted(what)}, {'written': [str(p) for p in written]}, True)
    return EXIT_OK


def cmd_history(args: argparse.Namespace) -> int:
    db = get_database(args.database)
    if args.clear:
        deleted = db.clear_runs()
        print(f"cleared {deleted} runs")
        return EXIT_OK

    runs = db.get_runs(command=args.command, limit=args.limit)
    records = [run.to_dict() for run in runs]
    rows = "\n".join(
        f"  #{r['id']:<5} {r['created_at']}  {r['command']:<8} {'PASS' if r['passed'] else 'FAIL'}  {r['parameters']}"
        for r in records
    ) or "  (empty)"
    _emit(args, ReportLibrary.render('history', count=len(records), rows=rows), {'runs': records})
    return EXIT_OK


# ===== PARSER =====

def _add_common(parser: argparse.ArgumentParser, formats: tuple = ("text", "json")) -> None:
    parser.add_argument('--config', help=f"flat KEY=value config file (default: ${config.CONFIG_ENV_VAR})")
    parser.add_argument('--rate', type=float, help='risk-free rate r')
    parser.add_argument('--vol', type=float, help='volatility sigma')
    parser.add_argument('--strike', type=float, help='strike K')
    parser.add_argument('--maturity', type=float, help='maturity T')
    parser.add_argument('--full-precision', action='store_true', help='print 17 significant digits')
    parser.add_argument("--format", choices=list(formats), default="text")
    parser.add_argument('--record', action='store_true', help='store the run in the run ledger')


def _add_oracle_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--spot', type=float)
    parser.add_argument('--paths', type=int)
    parser.add_argument('--steps', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--workers', type=int)
    parser.add_argument('--no-bridge', action='store_true', help='discrete monitoring only')
    parser.add_argument('--binary-killing', action='store_true', help='kill paths instead of weighting survival')
    parser.add_argument('--xi-max', dest='xi_max', type=float)
    parser.add_argument('--n-space', dest='n_space', type=int)
    parser.add_argument('--n-time', dest='n_time', type=int)


def _help(command: str) -> str:
    return ReportLibrary.get_template(command).description


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog='barrier-pricer', description=f"{config.APP_NAME} {config.APP_VERSION}")
    sub = parser.add_subparsers(dest='command', parser_class=CliArgumentParser)
    sub.required = True

    p_price = sub.add_parser('price', help=_help('price'))
    _add_common(p_price, formats=("text", "json", "csv"))
    p_price.add_argument('--spot', type=float)
    p_price.add_argument('--time', type=float, help='calendar time p in [0, T]')
    p_price.add_argument('--output', help='CSV target for --format csv')
    p_price.set_defaults(func=cmd_price)

    p_verify = sub.add_parser('verify', help=_help('verify'))
    _add_common(p_verify)
    p_verify.add_argument('--tolerance', type=float, help='override every check tolerance')
    p_verify.add_argument('--alpha-sweep', dest='alpha_sweep', help='start:stop:step over alpha')
    p_verify.add_argument('--seed', type=int)
    p_verify.add_argument('--check', action='append', help='run only the named check (repeatable)')
    p_verify.set_defaults(func=cmd_verify)

    p_oracle = sub.add_parser('oracle', help=_help('oracle'))
    _add_common(p_oracle)
    _add_oracle_flags(p_oracle)
    p_oracle.add_argument('--mode', choices=['fd', 'mc', 'both'], default='both')
    p_oracle.add_argument('--time', type=float)
    p_oracle.add_argument('--grids', help='comma-separated cell counts for --study')
    p_oracle.add_argument('--study', action='store_true', help='finite-difference convergence study')
    p_oracle.add_argument('--compare-monitoring', action='store_true', help='discrete vs bridge table')
    p_oracle.set_defaults(func=cmd_oracle)

    p_emit = sub.add_parser('emit', help='write CSV surfaces for plotting')
    _add_common(p_emit)
    _add_oracle_flags(p_emit)
    p_emit.add_argument('--what', action='append', choices=['surface', 'fd', 'mc', 'all'])
    p_emit.add_argument('--output', help='output directory')
    p_emit.add_argument('--spots', type=int)
    p_emit.add_argument('--times', type=int)
    p_emit.add_argument('--plot', action='store_true', help='also write an interactive HTML surface')
    p_emit.set_defaults(func=cmd_emit)

    p_history = sub.add_parser('history', help=_help('history'))
    p_history.add_argument('--command', choices=['price', 'verify', 'oracle', 'emit'])
    p_history.add_argument('--limit', type=int, default=20)
    p_history.add_argument('--clear', action='store_true')
    p_history.add_argument('--database', help='database URL (default: configured ledger)')
    p_history.add_argument('--format', choices=['text', 'json'], default='text')
    p_history.set_defaults(func=cmd_history)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    for problem in config.validate():
        logger.warning(f"Config: {problem}")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (PricingError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
