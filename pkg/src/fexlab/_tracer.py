"""Standalone line tracer for a single test run.

Invoked as a subprocess:

    python _tracer.py <module_file> <test_file> <out_json>

Runs the test script with a settrace hook restricted to the module file,
then writes executed line numbers, the first in-module exception line, and
the captured failure text to ``out_json``.  Exits 0 iff the test passed.
Must stay stdlib-only: it runs outside the package environment.
"""

import json
import os
import sys
import traceback


def main():
    module_file, test_file, out_json = sys.argv[1], sys.argv[2], sys.argv[3]
    module_path = os.path.abspath(module_file)
    # The working copy must be importable, like a directly executed script.
    sys.path.insert(0, os.getcwd())

    executed = []
    state = {"exception_line": None}

    def tracer(frame, event, arg):
        if frame.f_code.co_filename == module_path:
            if event == "line":
                executed.append(frame.f_lineno)
            elif event == "exception" and state["exception_line"] is None:
                exc_type = arg[0]
                # Iterator-protocol exceptions are control flow, not failures.
                if not issubclass(exc_type, (StopIteration, StopAsyncIteration, GeneratorExit)):
                    state["exception_line"] = frame.f_lineno
        return tracer

    error_text = ""
    exit_code = 0
    sys.settrace(tracer)
    try:
        import runpy

        runpy.run_path(os.path.abspath(test_file), run_name="__main__")
    except SystemExit as exc:
        code = exc.code
        exit_code = code if isinstance(code, int) else (0 if code is None else 1)
        if exit_code != 0:
            error_text = f"SystemExit: {code}"
    except BaseException:
        exit_code = 1
        error_text = traceback.format_exc()
    finally:
        sys.settrace(None)

    with open(out_json, "w") as fh:
        json.dump(
            {
                "executed_lines": executed,
                "exception_line": state["exception_line"],
                "error_text": error_text,
                "exit_code": exit_code,
            },
            fh,
        )
    sys.exit(exit_code)


if __name__ == "__main__":
    main()
