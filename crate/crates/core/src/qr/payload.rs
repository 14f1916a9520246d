use thiserror::Error;

use crate::{CardId, DeckId};

pub const MAGIC: &str = "MLE1";
const SEP: char = '|';

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
pub fn crc16_ccitt_false(bytes: &[u8]) -> u16 {
    crc16_update(0xFFFF, bytes)
}

const CRC_TABLE: [u16; 256] = {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u16) << 8;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000 != 0 { (crc << 1) ^ 0x1021 } else { crc << 1 };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
};

fn crc16_update(crc: u16, bytes: &[u8]) -> u16 {
    bytes.iter().fold(crc, |crc, &b| (crc << 8) ^ CRC_TABLE[usize::from((crc >> 8) as u8 ^ b)])
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error("invalid id {0:?}: ids must be non-empty and must not contain '|'")]
    InvalidId(String),
    #[error("payload does not start with {MAGIC}")]
    BadMagic,
    #[error("payload must have exactly four '|'-separated fields")]
    BadStructure,
    #[error("payload checksum mismatch")]
    BadChecksum,
}

/// Decoded content of a card QR code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QrPayload {
    pub deck_id: DeckId,
    pub card_id: CardId,
}

impl QrPayload {
    pub fn encode(&self) -> Result<String, PayloadError> {
        encode_payload(self.deck_id.as_str(), self.card_id.as_str())
    }
}

fn checksum(deck_id: &str, card_id: &str) -> u16 {
    let crc = crc16_update(0xFFFF, deck_id.as_bytes());
    let crc = crc16_update(crc, &[SEP as u8]);
    crc16_update(crc, card_id.as_bytes())
}

fn check_id(id: &str) -> Result<(), PayloadError> {
    if id.is_empty() || id.contains(SEP) {
        Err(PayloadError::InvalidId(id.to_owned()))
    } else {
        Ok(())
    }
}

/// Produces `MLE1|<deck_id>|<card_id>|<CRC as 4 uppercase hex digits>`.
pub fn encode_payload(deck_id: &str, card_id: &str) -> Result<String, PayloadError> {
    check_id(deck_id)?;
    check_id(card_id)?;
    Ok(format!("{MAGIC}{SEP}{deck_id}{SEP}{card_id}{SEP}{:04X}", checksum(deck_id, card_id)))
}

/// Inverse of [`encode_payload`]; rejects every string outside its image.
pub fn decode_payload(s: &str) -> Result<QrPayload, PayloadError> {
    let (deck_id, card_id) = split_payload(s)?;
    Ok(QrPayload { deck_id: deck_id.into(), card_id: card_id.into() })
}

/// Validates `s` and borrows its deck and card ids.
pub(crate) fn split_payload(s: &str) -> Result<(&str, &str), PayloadError> {
    let mut fields = s.split(SEP);
    if fields.next() != Some(MAGIC) {
        return Err(PayloadError::BadMagic);
    }
    let (Some(deck_id), Some(card_id), Some(crc), None) = (fields.next(), fields.next(), fields.next(), fields.next())
    else {
        return Err(PayloadError::BadStructure);
    };
    if deck_id.is_empty() || card_id.is_empty() {
        return Err(PayloadError::BadStructure);
    }
    let well_formed = crc.len() == 4 && crc.bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b));
    if !well_formed {
        return Err(PayloadError::BadChecksum);
    }
    let stated = u16::from_str_radix(crc, 16).map_err(|_| PayloadError::BadChecksum)?;
    if stated != checksum(deck_id, card_id) {
        return Err(PayloadError::BadChecksum);
    }
    Ok((deck_id, card_id))
}
