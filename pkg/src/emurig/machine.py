"""Machine assembly and emulation control.

build_machine turns a validated configuration into a wired Machine:
plug-ins are instantiated from the registry, configured, and handed each
other's capability contexts, then sealed so the architecture can no
longer change.  The Machine drives the CPU through the run-state
lifecycle (Breakpoint/Running/Stopped, with Reset as the transient
re-entry into Breakpoint) and publishes events to subscribers.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass
from enum import Enum

from emurig.config import ArchitectureConfig, validate
from emurig.contracts import (
    CompileOutput,
    CompilerPlugin,
    CpuPlugin,
    CpuRunState,
    CpuStatusSnapshot,
    DevicePlugin,
    EmuError,
    MemoryContext,
    MemoryPlugin,
    NoCompiledProgram,
    OutcomeKind,
    PluginKind,
    StepOutcome,
    WiringError,
)
from emurig.registry import PluginRegistry


class ControlCommand(Enum):
    RESET = "reset"
    STEP = "step"
    EXECUTE = "execute"
    PAUSE = "pause"
    STOP = "stop"


class IllegalCommand(EmuError):
    """Command not permitted in the current run state."""


# ---------------------------------------------------------------------------
# Events


@dataclass(frozen=True)
class StateChanged:
    old: CpuRunState
    new: CpuRunState
    reason: str


@dataclass(frozen=True)
class MemoryWritten:
    instance_id: str
    address: int
    count: int


@dataclass(frozen=True)
class DeviceOutput:
    instance_id: str
    context_id: str
    value: int


@dataclass(frozen=True)
class Halted:
    pc: int


@dataclass(frozen=True)
class BreakpointHit:
    address: int


EmuEvent = StateChanged | MemoryWritten | DeviceOutput | Halted | BreakpointHit


# ---------------------------------------------------------------------------
# Pure transition table


def transition(
    state: CpuRunState,
    cmd: ControlCommand,
    outcome: StepOutcome | None = None,
) -> CpuRunState:
    """Next run state for (state, cmd), or IllegalCommand.

    Reset is legal from every state and lands in Breakpoint.  Step only
    stays in Breakpoint while the instruction continued; a halt or fault
    forces Stopped."""
    if cmd is ControlCommand.RESET:
        return CpuRunState.BREAKPOINT

    if state is CpuRunState.BREAKPOINT:
        if cmd is ControlCommand.STEP:
            if outcome is not None and outcome.kind in (OutcomeKind.HALTED, OutcomeKind.FAULT):
                return CpuRunState.STOPPED
            return CpuRunState.BREAKPOINT
        if cmd is ControlCommand.EXECUTE:
            return CpuRunState.RUNNING
        if cmd is ControlCommand.STOP:
            return CpuRunState.STOPPED
    elif state is CpuRunState.RUNNING:
        if cmd is ControlCommand.PAUSE:
            return CpuRunState.BREAKPOINT
        if cmd is ControlCommand.STOP:
            return CpuRunState.STOPPED

    raise IllegalCommand(f"command {cmd.value} not allowed in state {state.value}")


# ---------------------------------------------------------------------------
# Event subscriptions


class Subscription:
    """Ordered event feed for one subscriber.

    Events are queued without bound; next() blocks up to timeout."""

    def __init__(self, machine: "Machine"):
        self._machine = machine
        self._queue: queue.SimpleQueue = queue.SimpleQueue()
        self._closed = False

    def _put(self, event: EmuEvent) -> None:
        self._queue.put(event)

    def next(self, timeout: float | None = None) -> EmuEvent | None:
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            return None

    def drain(self) -> list[EmuEvent]:
        events = []
        while True:
            try:
                events.append(self._queue.get_nowait())
            except queue.Empty:
                return events

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._machine._unsubscribe(self)


# ---------------------------------------------------------------------------
# Machine


class Machine:
    """A wired virtual computer plus its emulation controller.

    All plug-in mutation happens under one lock; the run loop re-acquires
    it per instruction, so pause/stop/reset take effect within one
    instruction.  Events are published in order while the lock is held.
    """

    def __init__(
        self,
        config: ArchitectureConfig,
        compiler: CompilerPlugin,
        cpu: CpuPlugin,
        memories: dict[str, MemoryPlugin],
        devices: dict[str, DevicePlugin],
        step_budget: int | None = None,
    ):
        self.config = config
        self.compiler = compiler
        self.cpu = cpu
        self.memories = memories
        self.devices = devices
        self.step_budget = step_budget
        self.compiler_memory: MemoryContext | None = None
        self.last_fault: str | None = None
        self.budget_exhausted = False

        self._lock = threading.RLock()
        self._cond = threading.Condition(self._lock)
        self._state = CpuRunState.BREAKPOINT
        self._breakpoints: set[int] = set()
        self._subscribers: list[Subscription] = []
        self._generation = 0
        self._pause_requested = False
        self._stop_requested = False

    # -- observers ----------------------------------------------------------

    @property
    def state(self) -> CpuRunState:
        with self._lock:
            return self._state

    @property
    def breakpoints(self) -> frozenset[int]:
        with self._lock:
            return frozenset(self._breakpoints)

    def snapshot(self) -> CpuStatusSnapshot:
        with self._lock:
            return CpuStatusSnapshot(
                registers=tuple(self.cpu.registers()),
                flags=tuple(self.cpu.flags()),
                state=self._state,
                program_counter=self.cpu.program_counter,
            )

    def subscribe(self) -> Subscription:
        sub = Subscription(self)
        with self._lock:
            self._subscribers.append(sub)
        return sub

    def _unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def _publish(self, event: EmuEvent) -> None:
        for sub in self._subscribers:
            sub._put(event)

    # -- breakpoints ---------------------------------------------------------

    def add_breakpoint(self, address: int) -> None:
        with self._lock:
            self._breakpoints.add(address)

    def remove_breakpoint(self, address: int) -> None:
        with self._lock:
            self._breakpoints.discard(address)

    # -- control commands ----------------------------------------------------

    def reset(self) -> None:
        """Re-initialize the CPU and land in Breakpoint; legal from any state.

        Memory contents are left alone; reloading is the compiler's job."""
        with self._cond:
            self._generation += 1  # orphan any run loop still scheduled
            self._pause_requested = False
            self._stop_requested = False
            self.budget_exhausted = False
            self.last_fault = None
            old = self._state
            try:
                start = self.compiler.start_address()
            except NoCompiledProgram:
                start = 0
            self.cpu.reset(start)
            self._state = CpuRunState.BREAKPOINT
            # reset always announces itself, even Breakpoint -> Breakpoint
            self._publish(StateChanged(old, CpuRunState.BREAKPOINT, "reset"))
            self._cond.notify_all()

    def step(self) -> StepOutcome:
        with self._cond:
            if self._state is not CpuRunState.BREAKPOINT:
                raise IllegalCommand(f"step not allowed in state {self._state.value}")
            outcome = self._execute_one()
            new = transition(self._state, ControlCommand.STEP, outcome)
            self._apply_outcome(outcome, new)
            return outcome

    def execute(self, budget: int | None = None) -> None:
        """Start free-running execution on a background thread."""
        with self._cond:
            if self._state is not CpuRunState.BREAKPOINT:
                raise IllegalCommand(f"execute not allowed in state {self._state.value}")
            if budget is None:
                budget = self.step_budget
            self._pause_requested = False
            self._stop_requested = False
            self.budget_exhausted = False
            resume_pc = self.cpu.program_counter
            self._set_state(CpuRunState.RUNNING, "execute")
            gen = self._generation
            thread = threading.Thread(
                target=self._run_loop,
                args=(gen, resume_pc, budget),
                name="emurig-run",
                daemon=True,
            )
            thread.start()

    def pause(self) -> None:
        """Stop executing after the current instruction; CPU state keeps
        whatever the last completed instruction left behind."""
        with self._cond:
            if self._state is not CpuRunState.RUNNING:
                raise IllegalCommand(f"pause not allowed in state {self._state.value}")
            self._pause_requested = True
            self._cond.wait_for(lambda: self._state is not CpuRunState.RUNNING)

    def stop(self) -> None:
        with self._cond:
            if self._state is CpuRunState.RUNNING:
                self._stop_requested = True
                self._cond.wait_for(lambda: self._state is not CpuRunState.RUNNING)
                # the loop may have ended in Breakpoint (pause raced us); finish the job
                if self._state is CpuRunState.BREAKPOINT:
                    self._set_state(CpuRunState.STOPPED, "stop")
                    self._cond.notify_all()
            elif self._state is CpuRunState.BREAKPOINT:
                self._set_state(CpuRunState.STOPPED, "stop")
                self._cond.notify_all()
            else:
                raise IllegalCommand(f"stop not allowed in state {self._state.value}")

    def wait_idle(self, timeout: float | None = None) -> CpuRunState:
        """Block until the machine leaves Running; returns the state reached."""
        with self._cond:
            self._cond.wait_for(lambda: self._state is not CpuRunState.RUNNING, timeout)
            return self._state

    def command(self, cmd: ControlCommand) -> None:
        if cmd is ControlCommand.RESET:
            self.reset()
        elif cmd is ControlCommand.STEP:
            self.step()
        elif cmd is ControlCommand.EXECUTE:
            self.execute()
        elif cmd is ControlCommand.PAUSE:
            self.pause()
        elif cmd is ControlCommand.STOP:
            self.stop()

    # -- compilation ----------------------------------------------------------

    def compile_and_load(self, source: str) -> CompileOutput:
        """Compile source; on success the image lands in the memory the
        compiler is wired to (if any).  Does not reset."""
        with self._lock:
            if self._state is CpuRunState.RUNNING:
                raise IllegalCommand("cannot compile while running")
            return self.compiler.compile(source, self.compiler_memory)

    # -- internals -------------------------------------------------------------

    def _set_state(self, new: CpuRunState, reason: str) -> None:
        old = self._state
        if old is new:
            return
        self._state = new
        self._publish(StateChanged(old, new, reason))

    def _execute_one(self) -> StepOutcome:
        try:
            return self.cpu.step()
        except (EmuError, ValueError) as e:
            return StepOutcome.fault(str(e))

    def _apply_outcome(self, outcome: StepOutcome, new: CpuRunState) -> None:
        if outcome.kind is OutcomeKind.HALTED:
            self._publish(Halted(self.cpu.program_counter))
            self._set_state(new, "halt")
        elif outcome.kind is OutcomeKind.FAULT:
            self.last_fault = outcome.message
            self._set_state(new, "fault")
        else:
            self._set_state(new, "step")

    def _run_loop(self, gen: int, resume_pc: int, budget: int | None) -> None:
        steps = 0
        first = True
        while True:
            with self._cond:
                if gen != self._generation or self._state is not CpuRunState.RUNNING:
                    return
                if self._stop_requested:
                    self._set_state(CpuRunState.STOPPED, "stop")
                    self._cond.notify_all()
                    return
                if self._pause_requested:
                    self._set_state(CpuRunState.BREAKPOINT, "pause")
                    self._cond.notify_all()
                    return
                pc = self.cpu.program_counter
                if pc in self._breakpoints and not (first and pc == resume_pc):
                    # stop before executing the marked instruction
                    self._publish(BreakpointHit(pc))
                    self._set_state(CpuRunState.BREAKPOINT, "breakpoint")
                    self._cond.notify_all()
                    return
                if budget is not None and steps >= budget:
                    self.budget_exhausted = True
                    self._set_state(CpuRunState.BREAKPOINT, "budget")
                    self._cond.notify_all()
                    return
                outcome = self._execute_one()
                steps += 1
                first = False
                if outcome.kind is OutcomeKind.HALTED:
                    self._publish(Halted(self.cpu.program_counter))
                    self._set_state(CpuRunState.STOPPED, "halt")
                    self._cond.notify_all()
                    return
                if outcome.kind is OutcomeKind.FAULT:
                    self.last_fault = outcome.message
                    self._set_state(CpuRunState.STOPPED, "fault")
                    self._cond.notify_all()
                    return


# ---------------------------------------------------------------------------
# Builder


class UnknownPlugin(WiringError):
    """Configuration names a plugin_id the registry does not know."""


def build_machine(
    cfg: ArchitectureConfig,
    registry: PluginRegistry,
    step_budget: int | None = None,
) -> Machine:
    """Instantiate, configure and wire every plug-in of cfg, then seal.

    Only this builder exchanges contexts; plug-ins never see each other
    whole.  The machine comes back reset, in Breakpoint."""
    report = validate(cfg)
    if not report.ok:
        first = report.violations[0]
        raise WiringError(f"configuration invalid: {first.rule_id}: {first.message}")

    instances: dict[str, object] = {}
    for p in cfg.plugins:
        try:
            plugin = registry.create(p.plugin_id)
        except KeyError:
            raise UnknownPlugin(f"unknown plugin {p.plugin_id!r}") from None
        if plugin.kind is not p.kind:
            raise WiringError(
                f"instance {p.instance_id!r} declares kind {p.kind.value} "
                f"but plugin {p.plugin_id!r} is a {plugin.kind.value}"
            )
        instances[p.instance_id] = plugin

    compiler = cpu = None
    memories: dict[str, MemoryPlugin] = {}
    devices: dict[str, DevicePlugin] = {}
    for instance_id, plugin in instances.items():
        if isinstance(plugin, CompilerPlugin):
            compiler = plugin
        elif isinstance(plugin, CpuPlugin):
            cpu = plugin
        elif isinstance(plugin, MemoryPlugin):
            memories[instance_id] = plugin
        elif isinstance(plugin, DevicePlugin):
            devices[instance_id] = plugin
    assert compiler is not None and cpu is not None

    machine = Machine(cfg, compiler, cpu, memories, devices, step_budget)

    for instance_id, plugin in instances.items():
        plugin.bind_host(instance_id, machine._publish)
        plugin.configure(cfg.settings.get(instance_id, {}))

    for conn in cfg.connections:
        src = instances[conn.from_instance]
        dst = instances[conn.to_instance]
        src_kind = cfg.kind_of(conn.from_instance)
        dst_kind = cfg.kind_of(conn.to_instance)
        try:
            if (src_kind, dst_kind) == (PluginKind.CPU, PluginKind.MEMORY):
                src.attach_memory(dst.memory_context(requester=PluginKind.CPU))
            elif (src_kind, dst_kind) == (PluginKind.DEVICE, PluginKind.CPU):
                dst.cpu_context.attach_device(conn.port, src.context(conn.context_id))
                src.attach_cpu(dst.cpu_context)
            elif (src_kind, dst_kind) == (PluginKind.DEVICE, PluginKind.MEMORY):
                src.attach_memory(dst.memory_context(requester=PluginKind.DEVICE))
            elif (src_kind, dst_kind) == (PluginKind.DEVICE, PluginKind.DEVICE):
                src.attach_device(dst.context(conn.context_id))
                dst.attach_device(src.context(None), port=conn.port)
            elif (src_kind, dst_kind) == (PluginKind.COMPILER, PluginKind.MEMORY):
                machine.compiler_memory = dst.memory_context(requester=PluginKind.COMPILER)
        except EmuError as e:
            if isinstance(e, WiringError):
                raise
            raise WiringError(
                f"cannot connect {conn.from_instance} -> {conn.to_instance}: {e}"
            ) from e

    for instance_id, memory in memories.items():
        def forward(address: int, values: list, _id=instance_id) -> None:
            if machine._subscribers:
                machine._publish(MemoryWritten(_id, address, len(values)))
        memory.add_listener(forward)

    for plugin in instances.values():
        plugin.seal()

    machine.reset()
    return machine
