"""Acceptance gate: one test per top-level criterion.

Each test is self-contained (no reliance on the other test modules) and
checks its stated tolerance, including wall-clock bounds where the
criterion names one.  Reference behavior comes from the independent
interpreters in oracles.py.
"""

import json
import random
import threading
import time

import pytest
from websockets.sync.client import connect as ws_connect

from emurig import config as cfgmod
from emurig.cli import _builtin_config_text, main
from emurig.config import ArchitectureConfig, Connection, PluginInstance, validate
from emurig.contracts import (
    CpuRunState,
    DeviceContext,
    OutcomeKind,
    PluginKind,
)
from emurig.devices import Terminal
from emurig.machine import (
    ControlCommand,
    IllegalCommand,
    StateChanged,
    build_machine,
    transition,
)
from emurig.rammachine import (
    RamAssembler,
    RamCpu,
    RamInputTape,
    RamOutputTape,
    RamProgramMemory,
    RamRegisterMemory,
)
from emurig.registry import default_registry
from emurig.service import serve
from emurig.tinyvn import ByteMemory, TinyVnCpu, tinyvn_lex
from emurig.tinyvn.assembler import tinyvn_assemble
from emurig.rammachine.assembler import ram_lex

from oracles import (
    gen_ram_program,
    gen_tinyvn_program,
    gen_tinyvn_source,
    render_ram,
    run_ram,
    run_tinyvn,
)

B, R, S = CpuRunState.BREAKPOINT, CpuRunState.RUNNING, CpuRunState.STOPPED
CONT, HALT, FAULT = OutcomeKind.CONTINUE, OutcomeKind.HALTED, OutcomeKind.FAULT


def builtin(name):
    return cfgmod.parse_config(_builtin_config_text(name))


def fresh_machine(name, step_budget=None):
    return build_machine(builtin(name), default_registry(), step_budget=step_budget)


# ---------------------------------------------------------------------------
# 1. State-machine conformance: all 15 (state x command) cases


def test_accept_state_machine_conformance_15_cases():
    began = time.monotonic()
    # (state, command) -> next state, or "illegal"; Step is outcome-dependent
    table = {
        (B, ControlCommand.RESET): B,
        (B, ControlCommand.STEP): {CONT: B, HALT: S, FAULT: S},
        (B, ControlCommand.EXECUTE): R,
        (B, ControlCommand.PAUSE): "illegal",
        (B, ControlCommand.STOP): S,
        (R, ControlCommand.RESET): B,
        (R, ControlCommand.STEP): "illegal",
        (R, ControlCommand.EXECUTE): "illegal",
        (R, ControlCommand.PAUSE): B,
        (R, ControlCommand.STOP): S,
        (S, ControlCommand.RESET): B,
        (S, ControlCommand.STEP): "illegal",
        (S, ControlCommand.EXECUTE): "illegal",
        (S, ControlCommand.PAUSE): "illegal",
        (S, ControlCommand.STOP): "illegal",
    }
    assert len(table) == 15

    checked = 0
    for (state, cmd), want in table.items():
        if want == "illegal":
            with pytest.raises(IllegalCommand):
                transition(state, cmd)
        elif isinstance(want, dict):
            for outcome_kind, target in want.items():
                class O:  # noqa: N801 - minimal outcome stand-in
                    kind = outcome_kind
                assert transition(state, cmd, O) is target
        else:
            assert transition(state, cmd) is want
        checked += 1
    assert checked == 15
    assert time.monotonic() - began < 1.0


# ---------------------------------------------------------------------------
# 2. TinyVN oracle equivalence: 1000 random programs, 0 mismatches


def drive_tinyvn(image, inputs, budget=10_000):
    mem = ByteMemory()
    cpu = TinyVnCpu()
    cpu.attach_memory(mem.memory_context())
    for address, value in image:
        mem.write_cell(address, value)
    queue = list(inputs)
    outputs = []
    ctx = DeviceContext("t", in_fn=lambda: queue.pop(0) if queue else 0,
                        out_fn=outputs.append)
    cpu.cpu_context.attach_device(0, ctx)
    cpu.reset(0)
    stop = "budget"
    for _ in range(budget):
        outcome = cpu.step()
        if outcome.kind is HALT:
            stop = "halt"
            break
        if outcome.kind is FAULT:
            stop = "fault"
            break
    return cpu, mem, outputs, stop


def test_accept_tinyvn_oracle_equivalence_1000_programs():
    began = time.monotonic()
    rng = random.Random(20260819)
    mismatches = 0
    for i in range(1000):
        image = gen_tinyvn_program(rng, max_len=64)
        inputs = [rng.randrange(0, 256) for _ in range(rng.randrange(0, 8))]
        cpu, mem, outputs, stop = drive_tinyvn(image, inputs)
        oracle = run_tinyvn(image, inputs=inputs, max_steps=10_000)
        same = (
            stop == oracle.stop
            and cpu.a == oracle.a
            and cpu.z == oracle.z
            and cpu.pc == oracle.pc
            and outputs == oracle.outputs
            and mem.read(0, 256) == oracle.memory
        )
        if not same:
            mismatches += 1
            print(f"mismatch on program {i}: {image}")
    assert mismatches == 0
    assert time.monotonic() - began < 30.0


# ---------------------------------------------------------------------------
# 3. RAM oracle equivalence: 500 random programs, 0 mismatches


def drive_ram(source, inputs, budget=10_000):
    prog, regs, cpu = RamProgramMemory(), RamRegisterMemory(), RamCpu()
    cpu.attach_memory(prog.memory_context(requester=cpu.kind))
    cpu.attach_memory(regs.memory_context())
    tape_in, tape_out = RamInputTape(), RamOutputTape()
    tape_in.feed(inputs)
    cpu.cpu_context.attach_device(0, tape_in.context())
    cpu.cpu_context.attach_device(1, tape_out.context())
    out = RamAssembler().compile(source, prog.memory_context())
    assert out.success, (source, out.diagnostics)
    cpu.reset(out.start_address)
    stop = "budget"
    for _ in range(budget):
        outcome = cpu.step()
        if outcome.kind is HALT:
            stop = "halt"
            break
        if outcome.kind is FAULT:
            stop = "fault"
            break
    return regs.nonzero_registers(), tape_out.values, stop


def test_accept_ram_oracle_equivalence_500_programs():
    began = time.monotonic()
    rng = random.Random(7321)
    mismatches = 0
    for i in range(500):
        program = gen_ram_program(rng)
        inputs = [rng.randrange(-1000, 1000) for _ in range(rng.randrange(0, 6))]
        regs, outputs, stop = drive_ram(render_ram(program), inputs)
        oracle = run_ram(program, inputs=inputs, max_steps=10_000)
        same = stop == oracle.stop and outputs == oracle.outputs and regs == oracle.regs
        if not same:
            mismatches += 1
            print(f"mismatch on program {i}: {program}")
    assert mismatches == 0
    assert time.monotonic() - began < 30.0


# ---------------------------------------------------------------------------
# 4. Step/execute equivalence on 200 programs


def run_machine(source, inputs, budget, use_execute):
    machine = fresh_machine("tinyvn")
    sub = machine.subscribe()
    out = machine.compile_and_load(source)
    assert out.success
    machine.reset()
    terminal = next(d for d in machine.devices.values() if isinstance(d, Terminal))
    terminal.feed(inputs)
    if use_execute:
        machine.execute(budget)
        machine.wait_idle(timeout=30)
    else:
        steps = 0
        while machine.state is B and steps < budget:
            machine.step()
            steps += 1
    events = [e for e in sub.drain() if not isinstance(e, StateChanged)]
    snap = machine.snapshot()
    memory = machine.memories["mem0"].read(0, 256)
    return events, snap, memory


def test_accept_step_execute_equivalence_200_programs():
    rng = random.Random(515253)
    for i in range(200):
        source = gen_tinyvn_source(rng)
        inputs = [rng.randrange(0, 256) for _ in range(rng.randrange(0, 4))]
        stepped = run_machine(source, inputs, budget=2000, use_execute=False)
        executed = run_machine(source, inputs, budget=2000, use_execute=True)
        assert stepped[0] == executed[0], f"event mismatch on program {i}:\n{source}"
        assert stepped[1] == executed[1], f"snapshot mismatch on program {i}:\n{source}"
        assert stepped[2] == executed[2], f"memory mismatch on program {i}:\n{source}"


# ---------------------------------------------------------------------------
# 5. Connection validation over a generated corpus


def random_corpus_config(rng):
    instances = [
        ("cpu0", PluginKind.CPU),
        ("asm0", PluginKind.COMPILER),
        ("mem0", PluginKind.MEMORY),
    ]
    for i in range(rng.randrange(0, 4)):
        kind = rng.choice([PluginKind.MEMORY, PluginKind.DEVICE])
        instances.append((f"x{i}", kind))
    kinds = dict(instances)
    ids = list(kinds)
    connections = []
    next_port = 0
    for _ in range(rng.randrange(1, 6)):
        src, dst = rng.sample(ids, 2)
        port = None
        if (kinds[src], kinds[dst]) == (PluginKind.DEVICE, PluginKind.CPU):
            port = next_port  # unique ports: direction legality is the only factor
            next_port += 1
        connections.append(Connection(src, dst, port))
    cfg = ArchitectureConfig(
        "corpus",
        tuple(PluginInstance(i, f"pl-{i}", k) for i, k in instances),
        tuple(connections),
    )
    legal = all(
        (kinds[c.from_instance], kinds[c.to_instance]) in cfgmod.ALLOWED_EDGES
        for c in connections
    )
    return cfg, legal


def test_accept_connection_validation_corpus():
    rng = random.Random(31337)
    legal_seen = illegal_seen = 0
    for _ in range(500):
        cfg, legal = random_corpus_config(rng)
        report = validate(cfg)
        assert report.ok == legal, cfg
        if legal:
            legal_seen += 1
            assert report.violations == ()
        else:
            illegal_seen += 1
            bad = {
                c
                for c in cfg.connections
                if (cfg.kind_of(c.from_instance), cfg.kind_of(c.to_instance))
                not in cfgmod.ALLOWED_EDGES
            }
            flagged = {v.connection for v in report.violations}
            assert flagged == bad
            assert all(
                v.rule_id in ("illegal-edge", "memory-initiates")
                for v in report.violations
            )
    # the corpus must genuinely exercise both classes
    assert legal_seen >= 50 and illegal_seen >= 50


# ---------------------------------------------------------------------------
# 6. Golden end-to-end runs through the CLI, expectations derived from oracles

TINYVN_SUM = """\
IN 0
STORE tmp
IN 0
ADD tmp
ADD zero
OUT 0
HALT
tmp: DB 0
zero: DB 48
"""

RAM_SUM = "READ 1\nREAD 2\nLOAD 1\nADD 2\nSTORE 3\nWRITE 3\nHALT\n"

RAM_SUM_TUPLES = [
    ("READ", "", 1), ("READ", "", 2), ("LOAD", "", 1), ("ADD", "", 2),
    ("STORE", "", 3), ("WRITE", "", 3), ("HALT", None, 0),
]


def test_accept_golden_end_to_end(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EMU_CONFIG_STORE", str(tmp_path / "store"))

    # what should the terminal show?  Ask the reference interpreter.
    image = tinyvn_assemble(TINYVN_SUM).image
    oracle_bytes = run_tinyvn(list(image), inputs=[2, 3]).outputs
    expected_terminal = "".join(chr(v) for v in oracle_bytes) + "\n"
    assert expected_terminal == "5\n"

    src = tmp_path / "sum.tvn"
    src.write_text(TINYVN_SUM)
    inp = tmp_path / "in.txt"
    inp.write_text("2\n3\n")
    assert main(["run", "--config", "tinyvn", str(src), "--input", str(inp)]) == 0
    assert capsys.readouterr().out == expected_terminal

    oracle_tape = run_ram(RAM_SUM_TUPLES, inputs=[2, 3]).outputs
    expected_tape = "".join(f"{v}\n" for v in oracle_tape)
    assert expected_tape == "5\n"

    rsrc = tmp_path / "sum.ram"
    rsrc.write_text(RAM_SUM)
    rinp = tmp_path / "tape.txt"
    rinp.write_text("2 3\n")
    assert main(["run", "--config", "ram", str(rsrc), "--input", str(rinp)]) == 0
    assert capsys.readouterr().out == expected_tape

    # exit codes: diagnostics 1, usage 2, fault 3, budget 4
    bad = tmp_path / "bad.tvn"
    bad.write_text("FROB 1\n")
    assert main(["compile", "--config", "tinyvn", str(bad)]) == 1
    assert main(["compile", "--config", "no-such-config", str(src)]) == 2
    faulty = tmp_path / "faulty.ram"
    faulty.write_text("READ 1\nHALT\n")
    assert main(["run", "--config", "ram", str(faulty)]) == 3
    spin = tmp_path / "spin.tvn"
    spin.write_text("loop: JMP loop\n")
    assert main(["run", "--config", "tinyvn", str(spin), "--max-steps", "500"]) == 4


# ---------------------------------------------------------------------------
# 7. Token coverage: 50-file corpus, concatenation reproduces source byte-exactly


def token_corpus():
    fixed = [
        "",
        "\n",
        "   \n\t\n",
        "HALT",
        "HALT\n",
        "loop: JZ loop",
        "a: b: c:\n",
        "LDI 5 ; trailing comment no newline",
        "; just a comment\n",
        "@#$%^&\n",
        "LDI 0xFF\nADD 0x0\n",
        "0x\n",
        "123abc\n",
        "LDI 5 ; café π ∑\n",
        "LDI 1\r\nHALT\r\n",
        "\tLDI\t5\t\n",
        "LDI\n",
        "STORE 300\nJMP -1\n",
        ":\n::\n",
        "label_with_underscores_42: HALT\n",
    ]
    rng = random.Random(88)
    generated = []
    while len(fixed) + len(generated) < 50:
        source = gen_tinyvn_source(rng)
        if rng.random() < 0.4:
            # splice an error character somewhere
            pos = rng.randrange(0, len(source))
            source = source[:pos] + rng.choice("@$?%") + source[pos:]
        generated.append(source)
    return fixed + generated


def test_accept_token_coverage_50_files():
    corpus = token_corpus()
    assert len(corpus) == 50
    for source in corpus:
        tokens = tinyvn_lex(source)
        assert "".join(t.lexeme for t in tokens) == source, repr(source)

    # the other bundled lexer keeps the same contract
    for source in ["READ 1\nx: LOAD *2\nJZ x ; done\n", "=*:\n", "LOAD =-5\nHALT\n"]:
        assert "".join(t.lexeme for t in ram_lex(source)) == source


# ---------------------------------------------------------------------------
# 8. Assembler/disassembler roundtrip on 500 label-free programs


def test_accept_roundtrip_500_programs():
    rng = random.Random(606)
    for i in range(500):
        source = gen_tinyvn_source(rng)
        first = tinyvn_assemble(source)
        assert first.success, source
        mem = ByteMemory()
        cpu = TinyVnCpu()
        cpu.attach_memory(mem.memory_context())
        for address, value in first.image:
            mem.write_cell(address, value)
        end = 1 + max(address for address, _ in first.image)
        address = 0
        rendered = []
        while address < end:
            text, length = cpu.disassemble(address)
            rendered.append(text)
            address += length
        second = tinyvn_assemble("\n".join(rendered) + "\n")
        assert second.success, f"program {i} re-assembly failed"
        assert second.image == first.image, f"program {i} image drift:\n{source}"


# ---------------------------------------------------------------------------
# 9. Protocol conformance: scripted session vs golden transcript


GOLDEN_REPLIES = [
    {"t": "diag", "success": True, "diagnostics": [], "start": 0, "size": 5},
    {"t": "state", "state": "breakpoint"},
    {"t": "mem", "values": [9, 5]},
    {"t": "error", "code": "illegal_command",
     "msg": "pause not allowed in state breakpoint"},
    {"t": "state", "state": "running"},
    {"t": "status", "state": "stopped", "pc": 4,
     "registers": [
         {"name": "A", "value": 5, "width": 8},
         {"name": "PC", "value": 4, "width": 8},
     ],
     "flags": [["Z", False]], "breakpoints": []},
    {"t": "error", "code": "illegal_command",
     "msg": "step not allowed in state stopped"},
]

GOLDEN_EVENTS = [
    {"t": "event", "kind": "mem_write", "mem": "mem0", "addr": 0, "count": 5},
    {"t": "event", "kind": "state", "old": "breakpoint", "new": "breakpoint",
     "reason": "reset"},
    {"t": "event", "kind": "state", "old": "breakpoint", "new": "running",
     "reason": "execute"},
    {"t": "event", "kind": "dev_out", "dev": "term0", "value": 5},
    {"t": "event", "kind": "halted", "pc": 4},
    {"t": "event", "kind": "state", "old": "running", "new": "stopped",
     "reason": "halt"},
]


def test_accept_protocol_conformance_golden_transcript(tmp_path):
    started = {}
    ready = threading.Event()

    def on_ready(srv, _svc):
        started["port"] = srv.socket.getsockname()[1]
        started["server"] = srv
        ready.set()

    thread = threading.Thread(
        target=serve,
        kwargs=dict(host="127.0.0.1", port=0, config_store=tmp_path, ready=on_ready),
        daemon=True,
    )
    thread.start()
    assert ready.wait(5)
    try:
        ws = ws_connect(f"ws://127.0.0.1:{started['port']}")
        hello = json.loads(ws.recv(timeout=5))
        assert hello == {"t": "hello", "version": 1, "config": "tinyvn"}

        script = [
            {"t": "compile", "source": "LDI 5\nOUT 0\nHALT\n"},
            {"t": "cmd", "cmd": "reset"},
            {"t": "mem_read", "mem": "mem0", "addr": 0, "count": 2},
            {"t": "cmd", "cmd": "pause"},
            {"t": "cmd", "cmd": "execute"},
            {"t": "status"},
            {"t": "cmd", "cmd": "step"},
        ]
        replies, events = [], []
        for n, message in enumerate(script, start=1):
            ws.send(json.dumps({**message, "req": n * 100}))
            while True:
                got = json.loads(ws.recv(timeout=5))
                if got.get("t") == "event":
                    events.append(got)
                    continue
                assert got.pop("req") == n * 100  # bijection; ids normalized out
                replies.append(got)
                break
            if message == {"t": "cmd", "cmd": "execute"}:
                # drain the run to completion before asking for status
                while not any(e.get("kind") == "halted" for e in events):
                    got = json.loads(ws.recv(timeout=5))
                    if got.get("t") == "event":
                        events.append(got)
        # the stopped state event may still be in flight; collect briefly
        deadline = time.monotonic() + 2
        while len(events) < len(GOLDEN_EVENTS) and time.monotonic() < deadline:
            try:
                got = json.loads(ws.recv(timeout=0.2))
            except TimeoutError:
                continue
            if got.get("t") == "event":
                events.append(got)

        assert replies == GOLDEN_REPLIES
        assert events == GOLDEN_EVENTS
        ws.close()
    finally:
        started["server"].shutdown()
        thread.join(timeout=5)


# ---------------------------------------------------------------------------
# 10. Pause latency under 100 ms, snapshot on an instruction boundary


def test_accept_pause_latency_under_100ms():
    machine = fresh_machine("tinyvn")
    out = machine.compile_and_load("loop: LDI 1\nJMP loop\n")
    assert out.success
    machine.reset()
    boundaries = {0, 2}  # LDI at 0..1, JMP at 2..3
    for _ in range(5):
        machine.execute()
        time.sleep(0.05)
        began = time.monotonic()
        machine.pause()
        latency = time.monotonic() - began
        assert latency < 0.1, f"pause took {latency * 1000:.1f} ms"
        snap = machine.snapshot()
        assert snap.state is B
        assert snap.program_counter in boundaries
    machine.stop()
