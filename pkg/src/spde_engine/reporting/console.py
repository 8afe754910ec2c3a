"""
Console Output
==============
Short human-readable summaries printed by the CLI after each subcommand.
Files written by the exporters are the reference; this is a convenience.
"""

from typing import Any, Dict, List

from spde_engine.models.results import AuditReport, EnsembleReport


def _verdict(passed: Any) -> str:
    if passed is None:
        return "n/a"
    return "PASS" if passed else "FAIL"


def print_header(command: str, metadata: Dict[str, Any]) -> None:
    print("\n" + "=" * 70)
    print(f"  spde-lab {command}   seed={metadata['seed']}   config={metadata['config_hash'][:12]}")
    print("=" * 70)


def print_ensemble_report(report: EnsembleReport) -> None:
    summary = report.summary
    print(f"\n{report.name.upper()}  members={report.members}  excluded={len(report.excluded)}")
    print("-" * 50)
    frame = report.to_frame()
    if not frame.empty:
        print(frame.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    for key in ("flatness", "c_disc", "correction_separation", "s", "varsigma"):
        if key in summary and summary[key] is not None:
            print(f"  {key:<24} {summary[key]:.6g}")
    print(f"  verdict                  {_verdict(summary.get('passed'))}")


def print_audit_report(report: AuditReport) -> None:
    print(f"\nHYPOTHESIS AUDIT  samples={report.samples}  seed={report.seed}")
    print("-" * 50)
    for check in report.checks:
        print(f"  {check.name:<28} {_verdict(check.passed):<5} max ratio {check.max_ratio:.4g}")
    print(f"  verdict                      {_verdict(report.passed)}")


def print_files(files: List[Any]) -> None:
    print("\nFiles:")
    for path in files:
        print(f"  {path}")
