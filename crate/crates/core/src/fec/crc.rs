//! Header check sequence and frame check sequence.

use crc::{Crc, CRC_16_IBM_3740, CRC_32_ISO_HDLC};

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
const HCS: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);
// CRC-32 as used by Ethernet: poly 0x04C11DB7 reflected, init and xorout 0xFFFFFFFF.
const FCS: Crc<u32> = Crc::<u32>::new(&CRC_32_ISO_HDLC);

pub fn hcs_crc16(bytes: &[u8]) -> u16 {
    HCS.checksum(bytes)
}

pub fn fcs_crc32(bytes: &[u8]) -> u32 {
    FCS.checksum(bytes)
}
