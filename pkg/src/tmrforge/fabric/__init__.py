from .arch import ArchParams, BitAddress, BitKind, ClbSub, FabricArch, make_arch
from .bitstream import (Bitstream, BitstreamError, decode_bitstream, encode_bitstream, hex_dump,
                        parse_hex_dump, read_bitstream, write_bitstream)
