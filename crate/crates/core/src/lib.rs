//! Core library for the lockdown escape game platform.
//!
//! The game is a hybrid card/board activity: players decorate a lockdown
//! room by scanning decoration cards that complete story statements, then
//! dig through piles of object and container cards, answering a question
//! for every card, until they can escape. Everything the companion service
//! needs lives here:
//!
//! - [`pack`]: the declarative content pack format, validation and the
//!   shipped default pack.
//! - [`game`]: the deterministic session state machine.
//! - [`qr`]: the card payload codec, a QR encoder and print sheet rendering.
//! - [`store`]: the append-only event log, replay and dataset export.
//! - [`analytics`]: questionnaire scoring and answer distributions.
//! - [`sim`]: Monte-Carlo and exact analysis of escape-rule data yield.

pub mod analytics;
pub mod game;
mod ids;
pub mod pack;
pub mod qr;
pub mod sim;
pub mod store;

pub use ids::{AvatarId, CardId, DeckId, OptionId, QuestionId, SessionId, SlotId, StatementId};
