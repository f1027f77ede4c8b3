"""
128-bit instruction words of the heterogeneous core.

Every word starts with a 2-bit kind and a 1-bit core selector, the remaining bits hold the
kind specific fields from the most significant end down, unused low bits are zero::

    Fetch / Result: buf_base 16 | stage 3 | last 1 | ddr_base 32 | ddr_offset 24 | beats 16
    Execute:        act_slot 8 | wgt_slot 8 | plane_a 3 | plane_w 3 | first 1 | last 1 |
                    cycles 32 | tile_row 16 | tile_col 16
    Sync:           cur 1 | next 2 | flag 3
"""
import enum
from dataclasses import dataclass, fields
from typing import Final

WORD_BITS: Final = 128
KIND_BITS: Final = 2
CORE_BITS: Final = 1
PAYLOAD_BITS: Final = WORD_BITS - KIND_BITS - CORE_BITS


class InstrKind(enum.IntEnum):
    FETCH = 0
    EXECUTE = 1
    RESULT = 2
    SYNC = 3


class Core(enum.IntEnum):
    LUT = 0
    DSP = 1


class Engine(enum.IntEnum):
    FETCH = 0
    EXECUTE = 1
    RESULT = 2


class Token(enum.IntFlag):
    ACT = 1
    WGT = 2
    OUT = 4


class BufferStage(enum.IntEnum):
    ACTIVATION = 0
    WEIGHT = 1
    OUTPUT = 2


class SyncState(enum.IntEnum):
    WAIT = 0
    SIGNAL = 1


TRANSFER_LAYOUT: Final = (("buf_base", 16), ("stage", 3), ("last", 1), ("ddr_base", 32), ("ddr_offset", 24),
                          ("beats", 16))

FIELD_LAYOUTS: Final = {
    InstrKind.FETCH: TRANSFER_LAYOUT,
    InstrKind.RESULT: TRANSFER_LAYOUT,
    InstrKind.EXECUTE: (("act_slot", 8), ("wgt_slot", 8), ("plane_a", 3), ("plane_w", 3), ("first", 1),
                        ("last", 1), ("cycles", 32), ("tile_row", 16), ("tile_col", 16)),
    InstrKind.SYNC: (("cur", 1), ("next", 2), ("flag", 3)),
}


@dataclass(frozen=True)
class Instr:
    kind: InstrKind
    core: Core
    buf_base: int = 0
    stage: int = 0
    last: int = 0
    ddr_base: int = 0
    ddr_offset: int = 0
    beats: int = 0
    act_slot: int = 0
    wgt_slot: int = 0
    plane_a: int = 0
    plane_w: int = 0
    first: int = 0
    cycles: int = 0
    tile_row: int = 0
    tile_col: int = 0
    cur: int = 0
    next: int = 0
    flag: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", InstrKind(self.kind))
        object.__setattr__(self, "core", Core(self.core))

        layout = dict(FIELD_LAYOUTS[self.kind])
        for f in fields(self):
            if f.name in ("kind", "core"):
                continue
            value = getattr(self, f.name)
            if f.name in layout:
                if not 0 <= value < (1 << layout[f.name]):
                    raise ValueError(f"{self.kind.name} field {f.name} must fit {layout[f.name]} bits but is {value}")
            elif value != 0:
                raise ValueError(f"{self.kind.name} instructions have no {f.name} field but it is set to {value}")

        if self.kind == InstrKind.SYNC:
            if self.next not in tuple(Engine):
                raise ValueError(f"sync peer engine must be one of {[e.value for e in Engine]} but is {self.next}")
            if self.flag not in tuple(Token):
                raise ValueError(f"sync flag must name exactly one token but is {self.flag:#05b}")

    def encode(self) -> int:
        word = self.kind << (WORD_BITS - KIND_BITS)
        word |= self.core << PAYLOAD_BITS
        shift = PAYLOAD_BITS
        for name, width in FIELD_LAYOUTS[self.kind]:
            shift -= width
            word |= getattr(self, name) << shift
        return word

    def to_hex(self) -> str:
        return f"{self.encode():032x}"

    def __str__(self):
        values = " ".join(f"{name}={getattr(self, name)}" for name, _ in FIELD_LAYOUTS[self.kind])
        return f"{self.kind.name} {self.core.name} {values}"


def decode(word: int) -> Instr:
    if not 0 <= word < (1 << WORD_BITS):
        raise ValueError(f"instruction word must fit {WORD_BITS} bits but is {word:#x}")

    kind = InstrKind(word >> (WORD_BITS - KIND_BITS))
    core_bit = (word >> PAYLOAD_BITS) & 1

    values = {}
    shift = PAYLOAD_BITS
    for name, width in FIELD_LAYOUTS[kind]:
        shift -= width
        values[name] = (word >> shift) & ((1 << width) - 1)

    if word & ((1 << shift) - 1):
        raise ValueError(f"reserved bits of {kind.name} word {word:032x} must be zero")

    return Instr(kind=kind, core=Core(core_bit), **values)


def sync(core: Core,
         state: SyncState,
         peer: Engine,
         token: Token) -> Instr:
    return Instr(kind=InstrKind.SYNC, core=core, cur=int(state), next=int(peer), flag=int(token))
