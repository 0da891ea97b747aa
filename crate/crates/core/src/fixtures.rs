//! Bundled example models.

pub const EMAIL: &str = include_str!("../fixtures/email.model");
pub const COFFEE: &str = include_str!("../fixtures/coffee.model");
pub const COFFEE_EVENTS: &str = include_str!("../fixtures/coffee_events.model");
pub const REQUEST_DISPENSE: &str = include_str!("../fixtures/request_dispense.model");
pub const LOOKAHEAD: &str = include_str!("../fixtures/lookahead.model");
pub const RESPONSE: &str = include_str!("../fixtures/response.model");

/// All fixtures by file stem.
pub const ALL: &[(&str, &str)] = &[
    ("email", EMAIL),
    ("coffee", COFFEE),
    ("coffee_events", COFFEE_EVENTS),
    ("request_dispense", REQUEST_DISPENSE),
    ("lookahead", LOOKAHEAD),
    ("response", RESPONSE),
];
