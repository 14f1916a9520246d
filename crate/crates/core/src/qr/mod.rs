//! Card QR assets: the payload wire format printed on every card back, a QR
//! symbol encoder, and SVG print sheets for cards and boards.

mod encoder;
mod payload;
mod sheets;

pub use encoder::{EcLevel, QrCode, QrError};
pub(crate) use payload::split_payload;
pub use payload::{crc16_ccitt_false, decode_payload, encode_payload, PayloadError, QrPayload, MAGIC};
pub use sheets::{render_print_sheets, PrintError, PrintSet, SvgPage, CARDS_PER_PAGE};
