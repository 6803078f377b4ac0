"""Runs one candidate program against one test manifest.

Reads a JSON manifest on stdin and writes exactly one JSON verdict line to
stdout. Candidate output never reaches stdout: fd 1 is pointed at stderr while
the candidate runs. Exit status is 0 whenever a verdict was written.
"""

import ast
import contextlib
import io
import json
import numbers
import os
import signal
import sys
import time
import traceback


class CaseTimeout(BaseException):
    pass


def _alarm(signum, frame):
    raise CaseTimeout()


def _budget(seconds):
    if seconds and seconds > 0:
        signal.setitimer(signal.ITIMER_REAL, seconds)


def _clear_budget():
    signal.setitimer(signal.ITIMER_REAL, 0)


def _exc_text(exc):
    return "".join(traceback.format_exception_only(type(exc), exc)).strip()


def _number(value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        return None
    value = float(value)
    return value if value == value else None


def _sides(assertion, namespace):
    """Evaluates both sides of `assert a == b` after a failure, for numeric diagnostics."""
    try:
        tree = ast.parse(assertion.strip())
        node = tree.body[0]
        if not isinstance(node, ast.Assert) or not isinstance(node.test, ast.Compare):
            return None
        cmp = node.test
        if len(cmp.ops) != 1 or not isinstance(cmp.ops[0], ast.Eq):
            return None
        left = eval(compile(ast.Expression(cmp.left), "<case>", "eval"), namespace)
        right = eval(compile(ast.Expression(cmp.comparators[0]), "<case>", "eval"), namespace)
        observed, expected = _number(left), _number(right)
        if observed is None or expected is None:
            return None
        return {"observed": observed, "expected": expected}
    except BaseException:
        return None


def run_asserts(manifest, verdict):
    namespace = {"__name__": "__candidate__"}
    budget = manifest.get("case_timeout") or 0
    captured = io.StringIO()
    with contextlib.redirect_stdout(captured):
        try:
            _budget(budget)
            setup = manifest.get("setup") or ""
            if setup.strip():
                exec(compile(setup, "<setup>", "exec"), namespace)
            exec(compile(manifest["source"], "<candidate>", "exec"), namespace)
            _clear_budget()
        except CaseTimeout:
            verdict.update(verdict="timeout", exception="candidate load exceeded budget")
            return
        except BaseException as exc:
            _clear_budget()
            verdict.update(verdict="error", exception=_exc_text(exc), exception_type=type(exc).__name__)
            return
        for index, assertion in enumerate(manifest.get("assertions") or []):
            start = time.perf_counter()
            try:
                _budget(budget)
                exec(compile(assertion, "<case %d>" % index, "exec"), namespace)
                _clear_budget()
            except CaseTimeout:
                verdict.update(verdict="timeout", failed_case_index=index, exception="case exceeded budget")
                return
            except AssertionError as exc:
                _clear_budget()
                verdict.update(verdict="fail", failed_case_index=index, exception=_exc_text(exc),
                               exception_type="AssertionError")
                verdict["values"] = _sides(assertion, namespace)
                return
            except BaseException as exc:
                _clear_budget()
                verdict.update(verdict="error", failed_case_index=index, exception=_exc_text(exc),
                               exception_type=type(exc).__name__)
                return
            finally:
                verdict["durations_ms"].append((time.perf_counter() - start) * 1000.0)
    verdict["verdict"] = "pass"


def run_io(manifest, verdict):
    budget = manifest.get("case_timeout") or 0
    code = compile(manifest["source"], "<candidate>", "exec")
    outputs = []
    verdict["outputs"] = outputs
    real_stdin = sys.stdin
    for index, case in enumerate(manifest.get("io_cases") or []):
        captured = io.StringIO()
        sys.stdin = io.StringIO(case.get("input", ""))
        start = time.perf_counter()
        try:
            with contextlib.redirect_stdout(captured):
                _budget(budget)
                try:
                    exec(code, {"__name__": "__main__"})
                except SystemExit:
                    pass
                finally:
                    _clear_budget()
        except CaseTimeout:
            verdict.update(verdict="timeout", failed_case_index=index, exception="case exceeded budget")
            return
        except BaseException as exc:
            verdict.update(verdict="error", failed_case_index=index, exception=_exc_text(exc),
                           exception_type=type(exc).__name__)
            outputs.append(captured.getvalue())
            return
        finally:
            sys.stdin = real_stdin
            verdict["durations_ms"].append((time.perf_counter() - start) * 1000.0)
        outputs.append(captured.getvalue())
    verdict["verdict"] = "pass"


def main():
    out = os.fdopen(os.dup(1), "w")
    os.dup2(2, 1)
    sys.stdout = io.TextIOWrapper(os.fdopen(os.dup(2), "wb"), write_through=True)
    try:
        manifest = json.loads(sys.stdin.read())
        style = manifest["style"]
        if style not in ("assert_list", "stdin_stdout"):
            raise ValueError("unknown style %r" % style)
        manifest["source"]
    except BaseException as exc:
        sys.stderr.write("bad manifest: %s\n" % _exc_text(exc))
        return 2
    signal.signal(signal.SIGALRM, _alarm)
    verdict = {"verdict": None, "failed_case_index": None, "exception": None, "exception_type": None,
               "durations_ms": []}
    try:
        if style == "assert_list":
            run_asserts(manifest, verdict)
        else:
            run_io(manifest, verdict)
    except SyntaxError as exc:
        verdict.update(verdict="error", exception=_exc_text(exc), exception_type=type(exc).__name__)
    out.write(json.dumps(verdict) + "\n")
    out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
