"""Run a learner's Python file with input() prompts suppressed.

Graders compare stdout against expected output that never includes the
prompt text, so `input("Age: ")` must read a line without echoing "Age: ".
Usage: python3 quiet_input.py <source.py>
"""
import builtins
import runpy
import sys


def _input(prompt=""):
    line = sys.stdin.readline()
    if not line:
        raise EOFError("EOF when reading a line")
    return line.rstrip("\n")


builtins.input = _input
runpy.run_path(sys.argv[1], run_name="__main__")
