from typing import Callable

import numpy as np
import pytest

from n3h_dse.cores.geometry import DspCoreGeometry, LutCoreGeometry
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.instr import Core, Engine, Instr, InstrKind, SyncState, Token, sync
from n3h_dse.sched.program import InstrProgram
from n3h_dse.sched.tunables import CycleTunables


@pytest.fixture
def hand_trace_program() -> InstrProgram:
    """
    fetch 10 cycles, signal 1 -> execute waits 11, runs 20, signals 1 -> result runs 5:
    l_wait 11, l_run 20, l_sig 1, l_rst 5, total 37
    """
    return InstrProgram(core=Core.LUT,
                        fetch=[Instr(kind=InstrKind.FETCH, core=Core.LUT, beats=10, last=1),
                               sync(Core.LUT, SyncState.SIGNAL, Engine.EXECUTE, Token.ACT)],
                        execute=[sync(Core.LUT, SyncState.WAIT, Engine.FETCH, Token.ACT),
                                 Instr(kind=InstrKind.EXECUTE, core=Core.LUT, cycles=20, first=1, last=1),
                                 sync(Core.LUT, SyncState.SIGNAL, Engine.RESULT, Token.OUT)],
                        result=[sync(Core.LUT, SyncState.WAIT, Engine.EXECUTE, Token.OUT),
                                Instr(kind=InstrKind.RESULT, core=Core.LUT, stage=2, beats=5, last=1)])


@pytest.fixture
def tunables() -> CycleTunables:
    return CycleTunables()


@pytest.fixture
def small_tiles() -> CycleTunables:
    # several row and column tiles on small workloads
    return CycleTunables(tile_rows=64, tile_cols=32)


@pytest.fixture
def base_config() -> ArchConfig:
    return ArchConfig(device="XC7Z020",
                      lut=LutCoreGeometry(m=8, n=16, k=128),
                      dsp=DspCoreGeometry(n_reg_row_a=8, d_dbuf_a=2048))


def _random_config(rng: np.random.Generator) -> ArchConfig:
    # draws from the XC7Z020 search ranges
    return ArchConfig(device="XC7Z020",
                      lut=LutCoreGeometry(m=int(rng.integers(1, 51)),
                                          n=int(rng.integers(1, 51)),
                                          k=64 * int(rng.integers(1, 5)),
                                          d_lbuf_a=1024 * int(rng.integers(1, 51))),
                      dsp=DspCoreGeometry(n_reg_row_a=int(rng.integers(1, 33)),
                                          d_dbuf_a=1024 * int(rng.integers(1, 26)),
                                          d_dbuf_w=1024 * int(rng.integers(1, 5))))


@pytest.fixture
def random_config() -> Callable[[np.random.Generator], ArchConfig]:
    """Returns a generator of configurations drawn from the XC7Z020 search ranges."""
    return _random_config
