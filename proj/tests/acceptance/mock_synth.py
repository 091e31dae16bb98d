#!/usr/bin/env python3
# stand-in synthesizer: guards one unguarded ensures clause per request
import json
import re
import sys

FIELDS = ["filename", "program", "error_trace", "error", "trace_assertions", "context", "priority", "k"]


def frozen(line):
    return "{:trusted}" in line or "@trust" in line


def main():
    req = json.loads(sys.stdin.read())
    missing = [f for f in FIELDS if f not in req]
    if missing:
        print("missing fields: " + ", ".join(missing), file=sys.stderr)
        return 2
    prog = req["program"]
    arr = re.search(r"\((\w+): array<int>", prog)
    ret = re.search(r"returns \((\w+): int\)", prog)
    if not arr or not ret:
        return 0
    guard = "0 <= %s < %s.Length" % (ret.group(1), arr.group(1))
    for line in prog.split("\n"):
        m = re.match(r"^(\s*)ensures (.*)$", line)
        if not m or frozen(line) or (arr.group(1) + "[") not in line or guard in line:
            continue
        body = m.group(2).rstrip()
        if body.startswith("forall") or body.startswith("exists"):
            body = "(" + body + ")"
        sys.stdout.write("# modification 1\n")
        sys.stdout.write("<file>%s</file>\n" % req["filename"])
        sys.stdout.write("<original>\n%s\n</original>\n" % line)
        sys.stdout.write("<patched>\n%sensures %s ==> %s // pr {:trusted}\n</patched>\n" % (m.group(1), guard, body))
        break
    return 0


if __name__ == "__main__":
    sys.exit(main())
