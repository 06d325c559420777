"""Miniature SMT-LIB2 responder for exercising the solver subprocess path.

Understands exactly the subset the oracle emits (QF_LIA terms built from
and/or/not, comparisons, + - *, integer constants) and answers by brute
force over a small window per variable, which is adequate for the bounded
formulas the tests send. Not a real solver.
"""

import itertools
import sys

WINDOW = range(-8, 9)


def tokenize(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse(tokens):
    tok = tokens.pop(0)
    if tok == "(":
        out = []
        while tokens[0] != ")":
            out.append(parse(tokens))
        tokens.pop(0)
        return out
    return tok


def parse_all(text):
    tokens = tokenize(text)
    forms = []
    while tokens:
        forms.append(parse(tokens))
    return forms


def evaluate(node, env):
    if isinstance(node, str):
        if node == "true":
            return True
        if node == "false":
            return False
        if node.lstrip("-").isdigit():
            return int(node)
        return env[node]
    head = node[0]
    args = [evaluate(a, env) for a in node[1:]]
    if head == "and":
        return all(args)
    if head == "or":
        return any(args)
    if head == "not":
        return not args[0]
    if head == "=":
        return args[0] == args[1]
    if head == "<":
        return args[0] < args[1]
    if head == "<=":
        return args[0] <= args[1]
    if head == ">":
        return args[0] > args[1]
    if head == ">=":
        return args[0] >= args[1]
    if head == "+":
        return sum(args)
    if head == "-":
        return -args[0] if len(args) == 1 else args[0] - args[1]
    if head == "*":
        out = 1
        for a in args:
            out *= a
        return out
    raise ValueError(f"unsupported form {head}")


def main():
    forms = parse_all(sys.stdin.read())
    variables = []
    asserts = []
    for form in forms:
        if isinstance(form, list) and form:
            if form[0] == "declare-const":
                variables.append(form[1])
            elif form[0] == "assert":
                asserts.append(form[1])
            elif form[0] == "check-sat":
                for combo in itertools.product(WINDOW, repeat=len(variables)):
                    env = dict(zip(variables, combo))
                    if all(evaluate(a, env) for a in asserts):
                        print("sat")
                        return
                print("unsat")
                return
    print("unknown")


if __name__ == "__main__":
    main()
