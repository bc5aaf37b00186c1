#!/usr/bin/env python3
"""Writes the RV Timer replay transcript and canned simulator logs.

The story: ten initial assertions, three of them wrong (two syntax errors and
one missing reset term). Syntax problems take seven responses to clear, the
missing signal and timing failures five more. Run from the repository root.
"""
import json
import os

HERE = os.path.join("fixtures", "rv_timer")


def block(comment, name, body, end="endproperty", assert_stmt=None, header=None):
    header = header if header is not None else f"property {name};"
    assert_stmt = assert_stmt if assert_stmt is not None else f"assert property ({name});"
    return f"// {comment}\n{header}\n@(posedge clk_i) {body}\n{end}\n{assert_stmt}"


def fence(*blocks, prose=None):
    text = "```systemverilog\n" + "\n\n".join(blocks) + "\n```"
    return f"{prose}\n\n{text}" if prose else text


A1 = block("Assertion to check if tick_count resets to 0 on reset", "p_reset_tick_count",
           "(!rst_ni) |-> (tick_count == 12'h0);", end="end property")
A2 = block("Assertion to check if tick_count increments correctly", "p_tick_count_increment",
           "(active && (tick_count < prescaler)) |-> (tick_count == $past(tick_count) + 1);", end="end property")
A3_C = "Assertion to check that the interrupt fires on compare"
A4 = block("Assertion to check that tick fires when tick_count reaches prescaler", "p_tick_on_prescaler",
           "(active && (tick_count == prescaler)) |-> tick;")
A5 = block("Assertion to check that no tick occurs while inactive", "p_no_tick_when_inactive",
           "(!active) |-> (!tick);")
A6_C = "Assertion to check that mtime advances by step on each tick"
A7 = block("Assertion to check that mtime holds without a tick", "p_mtime_hold_without_tick",
           "(rst_ni && !tick) |=> (mtime == $past(mtime));")
A8 = block("Assertion to check that tick_count wraps after a tick", "p_tick_count_wrap",
           "(rst_ni && tick) |=> (tick_count == 12'h0);")
A9 = block("Assertion to check that the interrupt stays low below compare", "p_no_intr_below_compare",
           "(mtime < mtimecmp) |-> (!intr_o);")
A10 = block("Assertion to check that mtime resets to 0", "p_reset_mtime",
            "(!rst_ni) |=> (mtime == 64'h0);")

A3 = "p_intr_on_compare"
A6 = "p_mtime_increment"


def a3(body, **kw):
    return block(A3_C, A3, body, **kw)


def a6(body, **kw):
    return block(A6_C, A6, body, **kw)


R0 = fence(
    A1, A2,
    # identifier missing: no clock signal after posedge
    f"// {A3_C}\nproperty {A3};\n@(posedge ) (mtime >= mtimecmp) |-> intr_o;\nendproperty\nassert property ({A3});",
    A4, A5,
    # token missing: unclosed parenthesis
    a6("tick |=> (mtime == $past(mtime) + step;"),
    A7, A8, A9, A10,
    prose="Here are SystemVerilog assertions for the RV Timer functional requirements.",
)

responses = [
    ("generate", R0, 6340),
    # n=1: A3 passes the parser but uses a reserved word; A6 lacks the final ';'
    ("repair", fence(a3("(mtime >= mtimecmp) |-> int;"),
                     a6("tick |=> (mtime == $past(mtime) + step);", assert_stmt=f"assert property ({A6})")), 4210),
    # n=2: both parse; the simulator rejects 'int' and 'time'
    ("repair", fence(a6("tick |=> (time == $past(time) + step);")), 3980),
    # n=3: A6 corrected; A3 loses a ')'
    ("repair", fence(a3("(mtime >= mtimecmp |-> intr_o;"), a6("tick |=> (mtime == $past(mtime) + step);")), 4420),
    # n=4: A3 uses 'time'
    ("repair", fence(a3("(time >= mtimecmp) |-> intr_o;")), 3870),
    # n=5: A3 assert statement loses its ')'
    ("repair", fence(a3("(mtime >= mtimecmp) |-> intr_o;", assert_stmt=f"assert property ({A3};")), 3650),
    # n=6: A3 loses endproperty
    ("repair", fence(f"// {A3_C}\nproperty {A3};\n@(posedge clk_i) (mtime >= mtimecmp) |-> intr_o;\nassert property ({A3});"), 3720),
    # n=7: syntax clean; the simulator reports the missing reset in A2
    ("repair", fence(a3("(mtime >= mtimecmp) |-> intr_o;")), 3590),
    # n=8: A2 split into two new assertions (one cycle early, one cycle late)
    ("repair", fence(
        block("Assertion for tick_count increment", "tick_count_increment",
              "(rst_ni && active && (tick_count < prescaler)) |-> (tick_count == $past(tick_count) + 1);"),
        block("Assertion for tick_count reset on reset deassertion", "tick_count_reset_on_reset_deassert",
              "(!$past(rst_ni, 1) && rst_ni) |=> (tick_count == 0);"),
        prose="The assertion needs rst_ni; it is clearer as two properties.",
    ), 5120),
    # n=9: 2a fixed to the non-overlapping form
    ("repair", fence(block("Assertion for tick_count increment", "tick_count_increment",
                           "(rst_ni && active && (tick_count < prescaler)) |=> (tick_count == $past(tick_count) + 1);")), 4010),
    # n=10: 2b fixed to same-cycle
    ("repair", fence(block("Assertion for tick_count reset on reset deassertion", "tick_count_reset_on_reset_deassert",
                           "(!$past(rst_ni, 1) && rst_ni) -> (tick_count == 0);")), 3880),
    # n=11: A6 gated on active; simulation clean
    ("repair", fence(a6("(tick && active) |=> (mtime == $past(mtime) + step);")), 3760),
]

transcript = [{"purpose": p, "text": t, "latency_ms": ms} for p, t, ms in responses]
with open(os.path.join(HERE, "rv_timer.transcript.json"), "w") as f:
    json.dump(transcript, f, indent=2)
    f.write("\n")

COMPILE = "### PHASE: compile\nParsing rtl/rv_timer.sv\nParsing tb/tb_rv_timer.sv\nParsing generated_assertions.sv\n"
ELAB_OK = "Elaborating tb_rv_timer\n"


def run(*lines, finish):
    return "### PHASE: run\nStarting simulation of tb_rv_timer\n" + "".join(l + "\n" for l in lines) + f"$finish at {finish}\n"


# Line numbers follow the bind template and the canonical rendering: the
# assertions start at line 15 and each occupies 6 lines plus a blank line.
def body_line(k):
    return 15 + 7 * (k - 1) + 3


logs = {
    2: (COMPILE
        + f"ERROR[SYNTAX] generated_assertions.sv:{body_line(3)}: syntax error, unexpected 'int', expecting identifier\n"
        + f"ERROR[SYNTAX] generated_assertions.sv:{body_line(6)}: syntax error, unexpected 'time', expecting identifier\n"
        + "2 errors, compilation aborted\n", 1),
    4: (COMPILE
        + f"ERROR[SYNTAX] generated_assertions.sv:{body_line(3)}: syntax error, unexpected 'time', expecting identifier\n"
        + "1 error, compilation aborted\n", 1),
    7: (COMPILE + ELAB_OK
        + "ERROR[ELAB] undeclared signal 'rst_ni' in p_tick_count_increment\n"
        + "elaboration failed\n", 1),
    8: (COMPILE + ELAB_OK + run(
        "ERROR[TIMING] tick_count_increment: tick_count expected 1 got 0 at 25 ns",
        "ERROR[TIMING] tick_count_reset_on_reset_deassert: tick_count expected 0 got 1 at 25 ns",
        finish="80 ns"), 0),
    9: (COMPILE + ELAB_OK + run(
        "ERROR[TIMING] tick_count_reset_on_reset_deassert: tick_count expected 0 got 1 at 25 ns",
        finish="80 ns"), 0),
    10: (COMPILE + ELAB_OK + run(
        "ERROR[TIMING] p_mtime_increment: mtime expected 1 got 0 at 15 ns",
        finish="80 ns"), 0),
    11: (COMPILE + ELAB_OK + run("All checks passed", finish="80 ns"), 0),
}

for n, (text, code) in logs.items():
    with open(os.path.join(HERE, "logs", f"iter{n}.log"), "w") as f:
        f.write(text)
    if code:
        with open(os.path.join(HERE, "logs", f"iter{n}.exit"), "w") as f:
            f.write(f"{code}\n")
