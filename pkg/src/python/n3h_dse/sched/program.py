"""
Per-core instruction programs of one layer.

A program splits the core's GEMM share into row tiles and column tiles.  The fetch engine
loads the activations of a row tile and then the weights of each column tile, the execute
engine runs the column tiles of the current row and the result engine writes every finished
(row, column) tile back.  Buffers are slot rings: the k-th fetch into a ring with S slots
waits until the execute engine released fetch k - S.  Weights stay resident for the whole
layer when all column tiles fit the weight ring.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Final, Union

from n3h_dse.cores.geometry import DSP_REGISTER_COLUMNS, DspCoreGeometry, LutCoreGeometry
from n3h_dse.quantize.kl_alloc import lut_filter_count
from n3h_dse.quantize.scheme import DSP_WEIGHT_BITS
from n3h_dse.sched.arch_config import ArchConfig
from n3h_dse.sched.instr import BufferStage, Core, Engine, Instr, InstrKind, SyncState, Token, sync
from n3h_dse.sched.tunables import DEFAULT_TUNABLES, CycleTunables
from n3h_dse.workload.layer_spec import GemmShape

logger = logging.getLogger(__name__)

MAX_SLOTS: Final = 256
MAX_TILES: Final = 1 << 16
DDR_ADDRESS_MASK: Final = (1 << 32) - 1
DDR_OFFSET_MASK: Final = (1 << 24) - 1

ENGINE_KINDS: Final = {
    Engine.FETCH: InstrKind.FETCH,
    Engine.EXECUTE: InstrKind.EXECUTE,
    Engine.RESULT: InstrKind.RESULT,
}

# (signalling engine, waiting engine, token)
Channel = tuple[Engine, Engine, Token]


class BufferCapacityError(ValueError):
    """Raised when an on-chip buffer cannot hold one tile of the geometry."""


def channel_of(engine: Engine,
               instr: Instr) -> Channel:
    peer = Engine(instr.next)
    if instr.cur == SyncState.SIGNAL:
        return engine, peer, Token(instr.flag)
    return peer, engine, Token(instr.flag)


@dataclass
class InstrProgram:
    core: Core
    layer_index: int = 0
    fetch: list[Instr] = field(default_factory=list)
    execute: list[Instr] = field(default_factory=list)
    result: list[Instr] = field(default_factory=list)

    def __post_init__(self):
        for engine in Engine:
            for pc, instr in enumerate(self.queue(engine)):
                if instr.kind not in (ENGINE_KINDS[engine], InstrKind.SYNC):
                    raise ValueError(f"{engine.name} queue cannot hold {instr.kind.name} at pc {pc}")
                if instr.kind == InstrKind.SYNC and instr.next == engine:
                    raise ValueError(f"{engine.name} queue syncs with itself at pc {pc}")

    def queue(self,
              engine: Engine) -> list[Instr]:
        return (self.fetch, self.execute, self.result)[engine]

    def is_empty(self) -> bool:
        return len(self.fetch) + len(self.execute) + len(self.result) == 0

    def count(self,
              kind: InstrKind) -> int:
        return sum(1 for engine in Engine for instr in self.queue(engine) if instr.kind == kind)

    def channel_balance(self) -> dict[Channel, int]:
        """Returns signals minus waits per token channel, zero everywhere for a balanced program."""
        balance: Counter = Counter()
        for engine in Engine:
            for instr in self.queue(engine):
                if instr.kind == InstrKind.SYNC:
                    balance[channel_of(engine, instr)] += 1 if instr.cur == SyncState.SIGNAL else -1
        return dict(balance)

    def is_balanced(self) -> bool:
        return all(value == 0 for value in self.channel_balance().values())

    def listing(self) -> list[str]:
        lines = []
        for engine in Engine:
            for pc, instr in enumerate(self.queue(engine)):
                lines.append(f"{self.core.name} {engine.name} {pc} {instr.to_hex()}")
        return lines


@dataclass(frozen=True)
class BufferPlan:
    act_slots: int
    wgt_slots: int
    act_bits: int
    wgt_bits: int

    def weights_resident(self,
                         col_tile_count: int) -> bool:
        return col_tile_count <= self.wgt_slots


def _ceil_div(numerator: int,
              denominator: int) -> int:
    return -(-numerator // denominator)


def tile_sizes(extent: int,
               tile: int) -> list[int]:
    full, rest = divmod(extent, tile)
    return [tile] * full + ([rest] if rest else [])


def _slots(capacity_bits: int,
           unit_bits: int) -> int:
    return min(MAX_SLOTS, max(1, capacity_bits // unit_bits))


def plan_buffers(shape: GemmShape,
                 geometry: Union[LutCoreGeometry, DspCoreGeometry],
                 b_a: int,
                 b_w: int,
                 tunables: CycleTunables) -> BufferPlan:
    rows_t = min(shape.rows, tunables.tile_rows)
    cols_t = min(shape.cols, tunables.tile_cols)

    if isinstance(geometry, LutCoreGeometry):
        row_capacity = geometry.d_lbuf_a * geometry.k
        if shape.depth * b_a > row_capacity:
            raise BufferCapacityError(f"LUT-core activation buffer holds {row_capacity} bits per DPU row but one "
                                      f"row of depth {shape.depth} at {b_a} bits needs {shape.depth * b_a}")
        # one D_Lbuf_w x K weight buffer per DPU column
        column_capacity = geometry.d_lbuf_w * geometry.k
        if shape.depth * b_w > column_capacity:
            raise BufferCapacityError(f"LUT-core weight buffer holds {column_capacity} bits per DPU column but one "
                                      f"filter of depth {shape.depth} at {b_w} bits needs {shape.depth * b_w}")
        act_slots = _slots(geometry.m * row_capacity, rows_t * shape.depth * b_a)
        wgt_slots = _slots(geometry.n * column_capacity, cols_t * shape.depth * b_w)
        return BufferPlan(act_slots=act_slots, wgt_slots=wgt_slots, act_bits=b_a, wgt_bits=b_w)

    act_bits = tunables.dsp_activation_bits
    row_capacity = geometry.d_dbuf_a * 64
    if shape.depth * act_bits > row_capacity:
        raise BufferCapacityError(f"DSP-core activation buffer holds {row_capacity} bits per register row but one "
                                  f"row of depth {shape.depth} needs {shape.depth * act_bits}")
    # one 64-bit weight buffer per pair of weight register columns
    weight_capacity = geometry.d_dbuf_w * 64 * (geometry.n_reg_col_w // 2)
    register_tile_bits = DSP_REGISTER_COLUMNS * shape.depth * DSP_WEIGHT_BITS
    if register_tile_bits > weight_capacity:
        raise BufferCapacityError(f"DSP-core weight buffers hold {weight_capacity} bits but one register tile of "
                                  f"depth {shape.depth} needs {register_tile_bits}")
    act_slots = _slots(geometry.n_reg_row_a * row_capacity, rows_t * shape.depth * act_bits)
    wgt_slots = _slots(weight_capacity, cols_t * shape.depth * DSP_WEIGHT_BITS)
    return BufferPlan(act_slots=act_slots, wgt_slots=wgt_slots, act_bits=act_bits, wgt_bits=DSP_WEIGHT_BITS)


def lut_execute_cycles(rows_t: int,
                       depth: int,
                       cols_t: int,
                       geometry: LutCoreGeometry,
                       tunables: CycleTunables) -> int:
    """Cycles of one bit-plane pair: one binary M x K x N block per cycle."""
    return (_ceil_div(rows_t, geometry.m) * _ceil_div(cols_t, geometry.n) *
            _ceil_div(depth * tunables.lut_bits_pack, geometry.k))


def dsp_execute_cycles(rows_t: int,
                       depth: int,
                       cols_t: int,
                       geometry: DspCoreGeometry,
                       tunables: CycleTunables) -> int:
    """Cycles of one tile: each register tile fills its occupied rows, loads weights and drains."""
    register_tiles = _ceil_div(rows_t, geometry.n_reg_row_a)
    per_block = rows_t + (tunables.dsp_weight_fill_cycles + tunables.dsp_drain_cycles) * register_tiles
    return per_block * _ceil_div(cols_t, DSP_REGISTER_COLUMNS) * _ceil_div(depth, DSP_REGISTER_COLUMNS)


class _ProgramBuilder:

    def __init__(self,
                 core: Core,
                 layer_index: int,
                 tunables: CycleTunables):
        self.core = core
        self.tunables = tunables
        self.program = InstrProgram(core=core, layer_index=layer_index)

    def transfer(self,
                 engine: Engine,
                 stage: BufferStage,
                 slot: int,
                 vectors: int,
                 vector_bits: int,
                 ddr_base: int):
        """Moves `vectors` rows of `vector_bits` each, chunked to the beat limit of one instruction."""
        kind = InstrKind.FETCH if engine == Engine.FETCH else InstrKind.RESULT
        beats_per_vector = _ceil_div(vector_bits, self.tunables.bus_bits)
        stride = min(beats_per_vector * self.tunables.bus_bytes, DDR_OFFSET_MASK)
        remaining = vectors * beats_per_vector
        address = ddr_base
        while remaining > 0:
            beats = min(remaining, self.tunables.max_beats)
            remaining -= beats
            self.program.queue(engine).append(Instr(kind=kind,
                                                    core=self.core,
                                                    buf_base=slot,
                                                    stage=int(stage),
                                                    last=int(remaining == 0),
                                                    ddr_base=address & DDR_ADDRESS_MASK,
                                                    ddr_offset=stride,
                                                    beats=beats))
            address += beats

    def signal(self,
               engine: Engine,
               peer: Engine,
               token: Token):
        self.program.queue(engine).append(sync(self.core, SyncState.SIGNAL, peer, token))

    def wait(self,
             engine: Engine,
             peer: Engine,
             token: Token):
        self.program.queue(engine).append(sync(self.core, SyncState.WAIT, peer, token))


def gen_core_program(shape: GemmShape,
                     core: Core,
                     geometry: Union[LutCoreGeometry, DspCoreGeometry],
                     b_a: int,
                     b_w: int,
                     tunables: CycleTunables = DEFAULT_TUNABLES,
                     layer_index: int = 0) -> InstrProgram:
    """
    Builds the instruction program of one core for its share `shape` of a layer.

    `b_a` and `b_w` are the LUT-core operand bit-widths, the DSP-core ignores them.

    Raises
    ------
    BufferCapacityError
        if a buffer of `geometry` cannot hold one tile of `shape`.
    """
    expected_geometry = LutCoreGeometry if core == Core.LUT else DspCoreGeometry
    if not isinstance(geometry, expected_geometry):
        raise ValueError(f"{core.name} program needs a {expected_geometry.__name__} "
                         f"but got {type(geometry).__name__}")

    builder = _ProgramBuilder(core, layer_index, tunables)
    if shape.rows == 0 or shape.cols == 0:
        return builder.program

    row_tiles = tile_sizes(shape.rows, tunables.tile_rows)
    col_tiles = tile_sizes(shape.cols, tunables.tile_cols)
    if len(row_tiles) > MAX_TILES or len(col_tiles) > MAX_TILES:
        raise ValueError(f"{len(row_tiles)} x {len(col_tiles)} tiles exceed the 16-bit tile fields, "
                         f"increase tile_rows or tile_cols")

    plan = plan_buffers(shape, geometry, b_a, b_w, tunables)
    resident = plan.weights_resident(len(col_tiles))
    weight_fetches = len(col_tiles) if resident else len(row_tiles) * len(col_tiles)

    act_vector_bits = shape.depth * plan.act_bits
    wgt_vector_bits = shape.depth * plan.wgt_bits

    # fetch engine
    weight_index = 0
    for r, rows_t in enumerate(row_tiles):
        if r >= plan.act_slots:
            builder.wait(Engine.FETCH, Engine.EXECUTE, Token.ACT)
        builder.transfer(Engine.FETCH, BufferStage.ACTIVATION, r % plan.act_slots, rows_t, act_vector_bits,
                         r * tunables.tile_rows * _ceil_div(act_vector_bits, tunables.bus_bits))
        builder.signal(Engine.FETCH, Engine.EXECUTE, Token.ACT)
        if resident and r > 0:
            continue
        for c, cols_t in enumerate(col_tiles):
            if weight_index >= plan.wgt_slots:
                builder.wait(Engine.FETCH, Engine.EXECUTE, Token.WGT)
            builder.transfer(Engine.FETCH, BufferStage.WEIGHT, weight_index % plan.wgt_slots, cols_t,
                             wgt_vector_bits, c * tunables.tile_cols * _ceil_div(wgt_vector_bits, tunables.bus_bits))
            builder.signal(Engine.FETCH, Engine.EXECUTE, Token.WGT)
            weight_index += 1

    # execute and result engines
    weight_index = 0
    for r, rows_t in enumerate(row_tiles):
        for c, cols_t in enumerate(col_tiles):
            if c == 0:
                builder.wait(Engine.EXECUTE, Engine.FETCH, Token.ACT)
            needs_weights = r == 0 or not resident
            if needs_weights:
                builder.wait(Engine.EXECUTE, Engine.FETCH, Token.WGT)
            wgt_slot = (c if resident else weight_index) % plan.wgt_slots

            if core == Core.LUT:
                cycles = lut_execute_cycles(rows_t, shape.depth, cols_t, geometry, tunables)
                for i in range(b_a):
                    for j in range(b_w):
                        builder.program.execute.append(Instr(kind=InstrKind.EXECUTE,
                                                             core=core,
                                                             act_slot=r % plan.act_slots,
                                                             wgt_slot=wgt_slot,
                                                             plane_a=i,
                                                             plane_w=j,
                                                             first=int(i == 0 and j == 0),
                                                             last=int(i == b_a - 1 and j == b_w - 1),
                                                             cycles=cycles,
                                                             tile_row=r,
                                                             tile_col=c))
            else:
                builder.program.execute.append(Instr(kind=InstrKind.EXECUTE,
                                                     core=core,
                                                     act_slot=r % plan.act_slots,
                                                     wgt_slot=wgt_slot,
                                                     first=1,
                                                     last=1,
                                                     cycles=dsp_execute_cycles(rows_t, shape.depth, cols_t,
                                                                               geometry, tunables),
                                                     tile_row=r,
                                                     tile_col=c))

            builder.signal(Engine.EXECUTE, Engine.RESULT, Token.OUT)
            if needs_weights:
                if weight_index + plan.wgt_slots < weight_fetches:
                    builder.signal(Engine.EXECUTE, Engine.FETCH, Token.WGT)
                weight_index += 1
            if c == len(col_tiles) - 1 and r + plan.act_slots < len(row_tiles):
                builder.signal(Engine.EXECUTE, Engine.FETCH, Token.ACT)

            builder.wait(Engine.RESULT, Engine.EXECUTE, Token.OUT)
            out_row_beats = _ceil_div(shape.cols * tunables.result_bits, tunables.bus_bits)
            builder.transfer(Engine.RESULT, BufferStage.OUTPUT, 0, rows_t, cols_t * tunables.result_bits,
                             r * tunables.tile_rows * out_row_beats +
                             c * _ceil_div(tunables.tile_cols * tunables.result_bits, tunables.bus_bits))

    program = builder.program
    logger.debug(f"gen_core_program: {core.name} layer {layer_index} {shape}, "
                 f"{len(row_tiles)}x{len(col_tiles)} tiles, {plan}, resident weights {resident}, "
                 f"{len(program.fetch)}/{len(program.execute)}/{len(program.result)} instructions")

    return program


def gen_program(shape: GemmShape,
                cfg: ArchConfig,
                layer_index: int,
                core: Core,
                tunables: CycleTunables = DEFAULT_TUNABLES) -> InstrProgram:
    """
    Builds the program of `core` for its share of the layer with GEMM `shape`.

    The share follows the split ratio of the layer in `cfg`, the LUT-core bit-widths follow
    its quantization scheme.  A core without filters gets an empty program.
    """
    layer_quant = cfg.layer_quant(layer_index)
    lut_cols = lut_filter_count(cfg.ratio(layer_index), shape.cols)
    if core == Core.LUT:
        return gen_core_program(shape.with_cols(lut_cols), core, cfg.lut, layer_quant.b_a, layer_quant.b_wl,
                                tunables, layer_index)
    return gen_core_program(shape.with_cols(shape.cols - lut_cols), core, cfg.dsp, layer_quant.b_a,
                            layer_quant.b_wd, tunables, layer_index)
