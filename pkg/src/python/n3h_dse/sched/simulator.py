"""
Discrete-event simulation of the fetch, execute and result engines of one core.

Each engine is a simpy process walking its instruction queue.  Sync tokens travel through
one simpy.Container per (signalling engine, waiting engine, token) channel.  Latency is
accounted on the execute engine: cycles blocked on tokens (l_wait), Execute cycles (l_run),
signalling Sync cycles (l_sig) and the tail until every engine finished (l_rst).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import simpy
from pydantic import BaseModel

from n3h_dse.sched.instr import Engine, Instr, InstrKind, SyncState
from n3h_dse.sched.program import Channel, InstrProgram, channel_of
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables, cycles_to_ms

logger = logging.getLogger(__name__)

# engine statuses
WAIT_FETCH = "WF"
WAIT_EXECUTE = "WE"
WAIT_RESULT = "WR"
SYNC_EXECUTE = "SE"
RUN = "RUN"
DONE = "DONE"

WAIT_STATUS = {Engine.FETCH: WAIT_FETCH, Engine.EXECUTE: WAIT_EXECUTE, Engine.RESULT: WAIT_RESULT}


class SimulationError(RuntimeError):
    """Raised on deadlock or token imbalance, carries the state of every engine."""

    def __init__(self,
                 message: str,
                 engine_states: dict[str, tuple[int, str]]):
        states = ", ".join(f"{name} pc={pc} status={status}" for name, (pc, status) in engine_states.items())
        super().__init__(f"{message} ({states})")
        self.engine_states = engine_states


class LatencyBreakdown(BaseModel):
    """Cycle accounting of one simulated program."""
    l_wait: int = 0
    l_run: int = 0
    l_sig: int = 0
    l_rst: int = 0

    class Config:
        frozen = True

    @property
    def total(self) -> int:
        return self.l_wait + self.l_run + self.l_sig + self.l_rst

    @property
    def total_ms(self) -> float:
        return cycles_to_ms(self.total)

    def __add__(self, other: "LatencyBreakdown") -> "LatencyBreakdown":
        return LatencyBreakdown(l_wait=self.l_wait + other.l_wait,
                                l_run=self.l_run + other.l_run,
                                l_sig=self.l_sig + other.l_sig,
                                l_rst=self.l_rst + other.l_rst)


@dataclass(frozen=True)
class TraceEvent:
    cycle: int
    core: str
    engine: str
    status: str
    pc: int

    def line(self) -> str:
        return f"{self.cycle} {self.core} {self.engine} {self.status} {self.pc}"


class _EngineState:

    def __init__(self):
        self.pc = 0
        self.status = RUN
        self.finished_at: Optional[int] = None


class _PipelineSimulation:

    def __init__(self,
                 program: InstrProgram,
                 tunables: CycleTunables,
                 trace: Optional[list[TraceEvent]]):
        self.program = program
        self.tunables = tunables
        self.trace = trace
        self.env = simpy.Environment()
        self.channels: dict[Channel, simpy.Container] = {}
        self.states = {engine: _EngineState() for engine in Engine}
        self.l_wait = 0
        self.l_run = 0
        self.l_sig = 0

    def channel(self,
                key: Channel) -> simpy.Container:
        if key not in self.channels:
            self.channels[key] = simpy.Container(self.env, init=0)
        return self.channels[key]

    def set_status(self,
                   engine: Engine,
                   status: str):
        state = self.states[engine]
        state.status = status
        if self.trace is not None:
            self.trace.append(TraceEvent(cycle=int(self.env.now),
                                         core=self.program.core.name,
                                         engine=engine.name,
                                         status=status,
                                         pc=state.pc))

    def duration(self,
                 instr: Instr) -> int:
        if instr.kind == InstrKind.EXECUTE:
            return instr.cycles
        return instr.beats

    def run_engine(self,
                   engine: Engine):
        state = self.states[engine]
        on_execute_engine = engine == Engine.EXECUTE

        for pc, instr in enumerate(self.program.queue(engine)):
            state.pc = pc
            if instr.kind == InstrKind.SYNC:
                container = self.channel(channel_of(engine, instr))
                if instr.cur == SyncState.SIGNAL:
                    self.set_status(engine, SYNC_EXECUTE)
                    yield self.env.timeout(self.tunables.sync_cycles)
                    yield container.put(1)
                    if on_execute_engine:
                        self.l_sig += self.tunables.sync_cycles
                else:
                    self.set_status(engine, WAIT_STATUS[Engine(instr.next)])
                    start = self.env.now
                    yield container.get(1)
                    if on_execute_engine:
                        self.l_wait += int(self.env.now - start)
            else:
                self.set_status(engine, RUN)
                cycles = self.duration(instr)
                yield self.env.timeout(cycles)
                if on_execute_engine:
                    self.l_run += cycles

        state.pc = len(self.program.queue(engine))
        state.finished_at = int(self.env.now)
        self.set_status(engine, DONE)

    def engine_states(self) -> dict[str, tuple[int, str]]:
        return {engine.name: (state.pc, state.status) for engine, state in self.states.items()}

    def run(self) -> LatencyBreakdown:
        for engine in Engine:
            self.env.process(self.run_engine(engine))
        self.env.run()

        blocked = [engine.name for engine, state in self.states.items() if state.finished_at is None]
        if blocked:
            raise SimulationError(f"deadlock at cycle {int(self.env.now)}, blocked engines {blocked}",
                                  self.engine_states())

        leftover = {key: container.level for key, container in self.channels.items() if container.level > 0}
        if leftover:
            key, level = next(iter(leftover.items()))
            raise SimulationError(f"token imbalance, {level} unconsumed {key[2].name} tokens from "
                                  f"{key[0].name} to {key[1].name}", self.engine_states())

        makespan = max(state.finished_at for state in self.states.values())
        execute_end = self.states[Engine.EXECUTE].finished_at
        return LatencyBreakdown(l_wait=self.l_wait,
                                l_run=self.l_run,
                                l_sig=self.l_sig,
                                l_rst=makespan - execute_end)


def simulate(program: InstrProgram,
             tunables: CycleTunables = DEFAULT_TUNABLES,
             trace: Optional[list[TraceEvent]] = None) -> LatencyBreakdown:
    """
    Runs `program` on the three engines and returns the execute engine's cycle accounting.

    Parameters
    ----------
    program
        instruction queues of one core
    tunables
        cycle constants, only sync_cycles is read here
    trace
        if given, every engine status change is appended to it

    Raises
    ------
    SimulationError
        if an engine blocks forever or tokens are left over.
    """
    if program.is_empty():
        return LatencyBreakdown()

    breakdown = _PipelineSimulation(program, tunables, trace).run()
    logger.debug(f"simulate: {program.core.name} layer {program.layer_index}, {breakdown}")

    return breakdown
