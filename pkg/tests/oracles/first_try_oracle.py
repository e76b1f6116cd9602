"""Scripted oracle that answers with a well-formed grammar immediately.

It also snapshots each request it receives (one JSON line appended per
call) when CCFG_ORACLE_LOG points at a file, so tests can assert what was
actually sent over the wire.
"""

import json
import os
import sys

request = sys.stdin.read()
log_path = os.environ.get("CCFG_ORACLE_LOG")
if log_path:
    with open(log_path, "a", encoding="utf-8") as log:
        log.write(request.strip() + "\n")
print(json.dumps({
    "grammar": {
        "productions": ["<S> -> [n] <s> [m]"],
        "constraints": ["1 <= n <= 2", "n <= m <= 3"],
    }
}))
