use super::ContentPack;

const COVID_PACK: &str = include_str!("../../packs/covid.json");

/// The shipped lockdown pack: seven decoration decks (Floor has two slots),
/// twelve object cards including the three core items, three containers.
pub fn default_covid_pack() -> ContentPack {
    ContentPack::from_json(COVID_PACK).expect("shipped pack parses")
}
