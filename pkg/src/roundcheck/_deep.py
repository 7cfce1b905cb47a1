"""Run deeply recursive work on a thread with a large stack.

Unrolled benchmarks nest thousands of lets; the parser, checkers and
interpreters are plain recursive functions, so the public entry points hop
onto a big-stack worker thread once.
"""

from __future__ import annotations

import functools
import sys
import threading

_STACK_BYTES = 512 * 1024 * 1024
_RECURSION_LIMIT = 1_000_000
_local = threading.local()


def deep(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if getattr(_local, "inside", False):
            return fn(*args, **kwargs)
        box: dict = {}

        def run():
            _local.inside = True
            try:
                box["value"] = fn(*args, **kwargs)
            except BaseException as exc:  # re-raised on the caller's thread
                box["error"] = exc

        old = threading.stack_size()
        threading.stack_size(_STACK_BYTES)
        try:
            if sys.getrecursionlimit() < _RECURSION_LIMIT:
                sys.setrecursionlimit(_RECURSION_LIMIT)
            worker = threading.Thread(target=run, name=f"deep-{fn.__name__}")
            worker.start()
        finally:
            threading.stack_size(old)
        worker.join()
        if "error" in box:
            raise box["error"]
        return box["value"]

    return wrapper
