import pytest

from n3h_dse.sched.instr import Core, Engine, Instr, InstrKind, SyncState, Token, decode, sync


def test_examples_decode_to_identical_fields():
    examples = [
        Instr(kind=InstrKind.FETCH, core=Core.DSP, buf_base=0xFFFF, stage=1, last=1, ddr_base=0xDEADBEEF,
              ddr_offset=0xABCDEF, beats=65535),
        Instr(kind=InstrKind.RESULT, core=Core.LUT, stage=2, ddr_base=12, ddr_offset=64, beats=7),
        Instr(kind=InstrKind.EXECUTE, core=Core.LUT, act_slot=255, wgt_slot=3, plane_a=7, plane_w=5, first=1,
              cycles=(1 << 32) - 1, tile_row=65535, tile_col=17),
        sync(Core.DSP, SyncState.SIGNAL, Engine.RESULT, Token.OUT),
        sync(Core.LUT, SyncState.WAIT, Engine.FETCH, Token.WGT),
    ]
    for instr in examples:
        word = instr.encode()
        assert word < (1 << 128), f"{instr} does not fit 128 bits"
        assert 32 == len(instr.to_hex()), "hex form should have 32 digits"
        assert instr == decode(word), f"{instr} did not survive encoding"


def test_header_bits():
    word = sync(Core.DSP, SyncState.SIGNAL, Engine.EXECUTE, Token.ACT).encode()
    assert InstrKind.SYNC == word >> 126, "kind should sit in the top two bits"
    assert 1 == (word >> 125) & 1, "core bit should follow the kind"
    # cur=1, next=1, flag=001 right below the header
    assert 0b1_01_001 == (word >> 119) & 0x3F, "invalid sync payload"


def test_field_overflow():
    with pytest.raises(ValueError, match="field beats must fit 16 bits but is 65536"):
        Instr(kind=InstrKind.FETCH, core=Core.LUT, beats=65536)

    with pytest.raises(ValueError, match="EXECUTE field plane_a must fit 3 bits"):
        Instr(kind=InstrKind.EXECUTE, core=Core.LUT, plane_a=8)


def test_foreign_fields_rejected():
    with pytest.raises(ValueError, match="SYNC instructions have no cycles field"):
        Instr(kind=InstrKind.SYNC, core=Core.LUT, cycles=3, next=1, flag=1)


def test_sync_validation():
    with pytest.raises(ValueError, match="exactly one token"):
        Instr(kind=InstrKind.SYNC, core=Core.LUT, cur=1, next=1, flag=3)

    with pytest.raises(ValueError, match="peer engine"):
        Instr(kind=InstrKind.SYNC, core=Core.LUT, cur=1, next=3, flag=1)


def test_decode_rejects_reserved_bits():
    word = sync(Core.LUT, SyncState.WAIT, Engine.FETCH, Token.ACT).encode() | 1
    with pytest.raises(ValueError, match="reserved bits"):
        decode(word)

    with pytest.raises(ValueError, match="must fit 128 bits"):
        decode(1 << 128)
