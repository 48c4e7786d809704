import logging
from pathlib import Path
from typing import Optional

import plotly.graph_objects as go

from dcjnet.errors import EXIT_FAILURE, EXIT_OK, DCJException
from dcjnet.models import settings
from dcjnet.models.spec import ModelSpec, enumerate_states, state_dimension
from dcjnet.core.rates import validate_all
from dcjnet.core.stationary import check_subcriticality, marginals, partition_function
from dcjnet.core.verify import check_detailed_balance, compare_with_oracle
from dcjnet.commands.loader import run_header
from dcjnet.commands.simulate import TV_NAME
from dcjnet.schemas.reports import FullReport
from dcjnet.utils.io import atomic_write_text, read_csv, write_json

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
CHART_NAME = "tv_vs_events.html"


def build_report(spec: ModelSpec) -> FullReport:
    """Aggregate every check the tool runs; a failing stage is recorded as a notice"""
    size = state_dimension(spec)
    report = FullReport(
        header=run_header(spec),
        variant=spec.variant.variant.value,
        state_dimension=str(size),
        validation=validate_all(spec),
        subcriticality=check_subcriticality(spec),
    )
    failed = False

    if report.subcriticality.passed:
        try:
            report.partition_function = partition_function(spec)
        except DCJException as e:
            report.notices.append(f"partition function: {e.detail}")
    else:
        report.notices.append("partition function skipped: weight series diverge")

    try:
        states = enumerate_states(spec)
    except DCJException as e:
        report.notices.append(f"enumeration skipped: {e.detail}")
        return report

    try:
        report.balance = check_detailed_balance(spec, states)
    except DCJException as e:
        report.notices.append(f"detailed balance: {e.detail}")
        failed = True

    if size <= settings.ORACLE_BUDGET:
        try:
            report.oracle = compare_with_oracle(spec)
        except DCJException as e:
            report.notices.append(f"oracle: {e.detail}")
            failed = True
    else:
        report.notices.append(f"oracle skipped: {size} states exceed the oracle budget of {settings.ORACLE_BUDGET}")

    if report.partition_function is not None:
        report.marginals = marginals(spec, states)
    if failed:
        report.notices.append("verification failed")
    return report


def tv_chart(tv_csv: Path) -> Optional[go.Figure]:
    """Line chart of TV distance against event count, one trace per replica"""
    frame = read_csv(tv_csv)
    if frame.empty:
        return None
    fig = go.Figure()
    for label, rows in frame.groupby(frame["replica"].astype(str), sort=False):
        rows = rows.sort_values("events")
        fig.add_trace(go.Scatter(
            x=rows["events"], y=rows["total_variation"], mode="lines+markers", name=f"replica {label}",
            line=dict(width=3 if label == "merged" else 1),
        ))
    fig.update_layout(
        xaxis=dict(title="events", type="log"),
        yaxis=dict(title="total variation", type="log"),
        legend=dict(orientation="h", yanchor="bottom", y=-0.3, xanchor="center", x=0.5),
        margin=dict(l=40, r=20, t=30, b=60),
    )
    return fig


def cmd_report(spec: ModelSpec, out_dir: Path) -> int:
    out_dir = Path(out_dir)
    logger.info(f"Building full report for {spec.variant.variant.value}")
    report = build_report(spec)
    write_json(out_dir / REPORT_NAME, report)

    tv_csv = out_dir / TV_NAME
    if tv_csv.exists():
        fig = tv_chart(tv_csv)
        if fig is not None:
            atomic_write_text(out_dir / CHART_NAME, fig.to_html(include_plotlyjs="cdn"))
    for notice in report.notices:
        logger.warning(notice)

    if "verification failed" in report.notices or not report.passed:
        return EXIT_FAILURE
    return EXIT_OK
