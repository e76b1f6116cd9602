"""Scripted oracle replaying a three-step repair of a counted-list grammar.

Attempt 1 leans on an unsupported "+" repetition, attempt 2 unrolls the
number into fixed digit groups that explode under the row count, and
attempt 3 abstracts the number as a per-row variable.  The oracle is
stateless: it picks its answer from the iteration field of the request.
"""

import json
import sys

ATTEMPTS = [
    {
        "productions": ["<S> -> [n] <n> <T_n>",
                        "<T_i> -> <T_i-1> <s> [0-9]+",
                        "<T_1> -> [0-9]+"],
        "constraints": ["1 <= n <= 10^9"],
    },
    {
        "productions": ["<S> -> [n] <n> <T_n>",
                        "<T_i> -> <T_i-1> <s> [1-9][0-9][0-9]",
                        "<T_1> -> [1-9][0-9][0-9]"],
        "constraints": ["1 <= n <= 10^9"],
    },
    {
        "productions": ["<S> -> [n] <n> <T_n>",
                        "<T_i> -> <T_i-1> <s> a_i",
                        "<T_1> -> a_i"],
        "constraints": ["1 <= n <= 100", "-1000 <= a_i <= 1000"],
    },
]

request = json.load(sys.stdin)
iteration = int(request.get("iteration", 1))
grammar = ATTEMPTS[min(iteration, len(ATTEMPTS)) - 1]
print(json.dumps({"grammar": grammar}))
