//! HTTP/JSON service over the game engine, for the web client and facilitators.

pub mod error;
pub mod routes;
pub mod state;
pub mod view;

pub use error::ApiError;
pub use routes::{router, MAX_AVATAR_BYTES};
pub use state::AppState;
pub use view::StateView;
