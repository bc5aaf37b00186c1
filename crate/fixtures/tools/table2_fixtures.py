#!/usr/bin/env python3
"""Writes replay fixtures for the five Table II designs other than RV Timer.

Each design gets a spec, stub RTL and testbench, a bind template, a scripted
transcript and canned logs. The schedule is the same for every design: the
erroneous initial assertions fail the parser at n=0, then alternate between
timing failures (odd n) and syntax errors (even n) until the last repair
fixes them. rom_ctrl's last repair replaces two failing assertions with one.
Run from the repository root.
"""
import json
import os
import shutil

ROOT = os.path.join("fixtures", "table2")

DESIGNS = {
    "pattgen": dict(prompts=9, baseline=0, finish="110 ns", gen_ms=9450, errors=[2, 6], signals=[
        ("enable", 1), ("pattern", 32), ("bit_cnt", 6), ("len", 6), ("pda", 1), ("pcl", 1),
        ("done_o", 1), ("div_cnt", 16), ("div", 16), ("polarity", 1)], asserts=[
        ("Pattern counter clears on reset", "(!rst_ni) |=> (bit_cnt == 6'h0)"),
        ("Bit counter advances on each divided clock", "(enable && (div_cnt == div)) |=> (bit_cnt == $past(bit_cnt) + 1)"),
        ("Data output follows the current pattern bit", "(enable && (div_cnt == 16'h0)) |-> (pda == pattern[0])"),
        ("Done is raised after the last bit", "(enable && (bit_cnt == len) && (div_cnt == div)) |=> done_o"),
        ("Clock output idles at the configured polarity", "(!enable) |-> (pcl == polarity)"),
        ("Divider counter wraps at the divider value", "(enable && (div_cnt == div)) |=> (div_cnt == 16'h0)"),
        ("Counters hold while disabled", "(rst_ni && !enable) |=> (bit_cnt == $past(bit_cnt))"),
        ("Done is low while a pattern is running", "(enable && (bit_cnt < len)) |-> (!done_o)"),
        ("Divider counter clears on reset", "(!rst_ni) |=> (div_cnt == 16'h0)"),
    ]),
    "gpio": dict(prompts=8, baseline=0, finish="190 ns", gen_ms=12340, errors=[1, 4], signals=[
        ("cio_gpio_i", 32), ("data_in_q", 32), ("cio_gpio_o", 32), ("direct_out", 32),
        ("cio_gpio_en_o", 32), ("direct_oe", 32), ("intr_state", 32), ("intr_enable", 32), ("intr_o", 1)], asserts=[
        ("Input register samples the pins", "rst_ni |=> (data_in_q == $past(cio_gpio_i))"),
        ("Outputs drive the output register", "rst_ni |-> (cio_gpio_o == direct_out)"),
        ("Output enables follow the enable register", "rst_ni |-> (cio_gpio_en_o == direct_oe)"),
        ("Interrupt is raised for an enabled pending bit", "((intr_state & intr_enable) != 32'h0) |-> intr_o"),
        ("Interrupt is low with nothing pending", "((intr_state & intr_enable) == 32'h0) |-> (!intr_o)"),
        ("Input register clears on reset", "(!rst_ni) |=> (data_in_q == 32'h0)"),
    ]),
    "rom_ctrl": dict(prompts=14, baseline=6, finish="250 ns", gen_ms=14340, errors=[3, 4, 8, 10], merge=[3, 4], signals=[
        ("req", 1), ("gnt", 1), ("rvalid", 1), ("addr", 16), ("rdata", 32), ("check_done", 1),
        ("check_good", 1), ("digest", 32), ("exp_digest", 32), ("kmac_req", 1), ("kmac_ack", 1), ("alert", 1)], asserts=[
        ("Grant only follows a request", "gnt |-> req"),
        ("Read data is valid one cycle after a grant", "gnt |=> rvalid"),
        ("Requests are held off until the check is done", "(!check_done) |-> (!gnt)"),
        ("Request to the hash engine waits for its acknowledge", "(kmac_req && !kmac_ack) |=> kmac_req"),
        ("Check passes when the digests match", "(check_done && (digest == exp_digest)) |-> check_good"),
        ("Check fails when the digests differ", "(check_done && (digest != exp_digest)) |-> (!check_good)"),
        ("Alert is raised on a failed check", "(check_done && !check_good) |-> alert"),
        ("No alert before the check completes", "(!check_done) |-> (!alert)"),
        ("Read data is stable without a grant", "(rst_ni && !gnt) |=> (rdata == $past(rdata))"),
        ("Check status clears on reset", "(!rst_ni) |=> (!check_done)"),
        ("Address is stable while a request waits", "(req && !gnt) |=> (addr == $past(addr))"),
        ("Hash engine request clears on reset", "(!rst_ni) |=> (!kmac_req)"),
    ], merged=("p_rom_ctrl_kmac_handshake", "Hash engine handshake completes before the check",
               "(kmac_req && !kmac_ack && !check_done) |=> kmac_req")),
    "sram_ctrl": dict(prompts=8, baseline=0, finish="100 ns", gen_ms=10230, errors=[0, 7, 12], signals=[
        ("req", 1), ("gnt", 1), ("we", 1), ("addr", 14), ("wdata", 32), ("rdata", 32), ("rvalid", 1),
        ("init_req", 1), ("init_done", 1), ("scr_key_valid", 1), ("key_req", 1), ("key_ack", 1), ("locked", 1)], asserts=[
        ("Grant only follows a request", "gnt |-> req"),
        ("Reads return data one cycle later", "(gnt && !we) |=> rvalid"),
        ("Writes return no read data", "(gnt && we) |=> (!rvalid)"),
        ("No grants during initialization", "(init_req && !init_done) |-> (!gnt)"),
        ("Initialization completes before access", "gnt |-> init_done"),
        ("Key request waits for its acknowledge", "(key_req && !key_ack) |=> key_req"),
        ("Key becomes valid after an acknowledge", "key_ack |=> scr_key_valid"),
        ("Locked controller grants nothing", "locked |-> (!gnt)"),
        ("Address is stable while a request waits", "(req && !gnt) |=> (addr == $past(addr))"),
        ("Write data is stable while a request waits", "(req && we && !gnt) |=> (wdata == $past(wdata))"),
        ("Init done clears on reset", "(!rst_ni) |=> (!init_done)"),
        ("Key valid clears on reset", "(!rst_ni) |=> (!scr_key_valid)"),
        ("No read data without a prior grant", "rvalid |-> $past(gnt)"),
        ("Lock clears on reset", "(!rst_ni) |=> (!locked)"),
    ]),
    "adc_ctrl": dict(prompts=9, baseline=5, finish="460 ns", gen_ms=7560, errors=[2, 5], signals=[
        ("pwrup_req", 1), ("adc_pd", 1), ("adc_chn_sel", 2), ("adc_d", 10), ("adc_d_val", 1),
        ("filter_match", 1), ("intr_o", 1), ("np_sample_cnt", 8), ("oneshot_mode", 1), ("oneshot_done", 1)], asserts=[
        ("ADC stays powered down on reset", "(!rst_ni) |=> adc_pd"),
        ("Power-up request releases power-down", "pwrup_req |=> (!adc_pd)"),
        ("Channel select is one of the two channels", "(!adc_pd) |-> (adc_chn_sel != 2'b11)"),
        ("Valid data is only sampled while powered", "adc_d_val |-> (!adc_pd)"),
        ("Interrupt is raised on a filter match", "(filter_match && adc_d_val) |=> intr_o"),
        ("Sample counter advances on valid data", "(adc_d_val && !oneshot_mode) |=> (np_sample_cnt == $past(np_sample_cnt) + 1)"),
        ("One-shot completes after one valid sample", "(oneshot_mode && adc_d_val) |=> oneshot_done"),
        ("Sample counter clears on reset", "(!rst_ni) |=> (np_sample_cnt == 8'h0)"),
    ]),
}


def prop(name, comment, body):
    return f"// {comment}\nproperty {name};\n@(posedge clk_i) {body};\nendproperty\nassert property ({name});"


def broken(body):
    i = body.rfind(")")
    return body[:i] + body[i + 1:] if i >= 0 else "(" + body


def shifted(body):
    return body.replace("|->", "|=>", 1) if "|->" in body else body.replace("|=>", "|->", 1)


def fence(blocks):
    return "```systemverilog\n" + "\n\n".join(blocks) + "\n```"


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def build(design, d):
    out = os.path.join(ROOT, design)
    if os.path.isdir(out):
        shutil.rmtree(out)
    names = [f"p_{design}_{i + 1}" for i in range(len(d["asserts"]))]
    errors = d["errors"]
    repairs = d["prompts"] - 1

    bullets = "\n".join(f"- {c}." for c, _ in d["asserts"])
    write(os.path.join(out, "spec.md"),
          f"# Introduction\n\nSynthetic {design} block used to replay a Table II row.\n\n"
          f"# Theory of Operation\n\nSignals: {', '.join(s for s, _ in d['signals'])}. "
          f"All state is clocked by clk_i and reset by the active-low rst_ni.\n\n"
          f"# Functional Requirements\n\n{bullets}\n")
    ports = ",\n".join(f"  input logic {f'[{w - 1}:0] ' if w > 1 else ''}{s}" for s, w in d["signals"])
    write(os.path.join(out, "rtl", f"{design}.sv"),
          f"// Port shell only; the replay never compiles it.\nmodule {design} (\n  input logic clk_i,\n  input logic rst_ni,\n{ports}\n);\nendmodule\n")
    write(os.path.join(out, "tb", f"tb_{design}.sv"),
          f"module tb_{design};\n  initial $finish;\nendmodule\n")
    write(os.path.join(out, "bind.sv.tmpl"),
          f"// Assertions for {{{{design}}}}, checked under {{{{top}}}}.\nmodule {{{{design}}}}_sva (\n"
          f"  input logic clk_i,\n  input logic rst_ni,\n{ports}\n);\n\n{{{{assertions}}}}\n\nendmodule\n\n"
          f"bind {{{{design}}}} {{{{design}}}}_sva u_sva (.*);\n")

    def block(i, variant):
        c, body = d["asserts"][i]
        return prop(names[i], c, {"ok": body, "syntax": broken(body), "timing": shifted(body)}[variant])

    transcript = [{"purpose": "generate", "latency_ms": d["gen_ms"], "text": fence(
        [block(i, "syntax" if i in errors else "ok") for i in range(len(names))])}]
    logs = {}
    compile_ok = f"### PHASE: compile\nParsing rtl/{design}.sv\nParsing generated_assertions.sv\nElaborating tb_{design}\n"
    for r in range(1, repairs + 1):
        if r < repairs:
            variant = "timing" if r % 2 == 1 else "syntax"
            transcript.append({"purpose": "repair", "latency_ms": 3000 + 37 * r,
                               "text": fence([block(i, variant) for i in errors])})
            if variant == "timing":
                lines = "".join(f"ERROR[TIMING] {names[i]}: response one cycle off at {10 * (k + 2)} ns\n"
                                for k, i in enumerate(errors))
                logs[r] = compile_ok + "### PHASE: run\n" + lines + f"$finish at {d['finish']}\n"
        else:
            blocks = [block(i, "ok") for i in errors if i not in d.get("merge", [])]
            if "merge" in d:
                name, c, body = d["merged"]
                blocks.append(prop(name, c, body))
            transcript.append({"purpose": "repair", "latency_ms": 3000 + 37 * r, "text": fence(blocks)})
            logs[r] = compile_ok + "### PHASE: run\nAll checks passed\n" + f"$finish at {d['finish']}\n"

    write(os.path.join(out, f"{design}.transcript.json"), json.dumps(transcript, indent=2) + "\n")
    for n, text in logs.items():
        write(os.path.join(out, "logs", f"iter{n}.log"), text)
    config = {
        "design_name": design,
        "spec": "spec.md",
        "label_map": {
            "introduction": "Introduction",
            "system_overview": "Theory of Operation",
            "functional_requirements": "Functional Requirements",
        },
        "design": {
            "design_files": [f"rtl/{design}.sv"],
            "testbench_file": f"tb/tb_{design}.sv",
            "top_module": f"tb_{design}",
            "bind_template": "bind.sv.tmpl",
        },
        "provider": {"kind": "replay", "transcript": f"{design}.transcript.json"},
        "adapter": {"kind": "replay", "replay_dir": "logs"},
        "pattern_pack": "../../../packs/generic.pack.json",
        "max_iterations": 15,
        "output_dir": f"../../../target/runs/table2/{design}",
        "baseline_assertion_count": d["baseline"],
    }
    write(os.path.join(out, f"{design}.replay.run.json"), json.dumps(config, indent=2) + "\n")


for design, d in DESIGNS.items():
    build(design, d)
