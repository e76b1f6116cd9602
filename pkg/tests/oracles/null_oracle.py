"""Scripted oracle that never produces a usable grammar."""

import json
import sys

sys.stdin.read()
print(json.dumps({"grammar": {"productions": [], "constraints": []}}))
