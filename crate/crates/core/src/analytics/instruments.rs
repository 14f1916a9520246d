use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum InstrumentId {
    Sus,
    Approach,
    Empathy,
}

impl InstrumentId {
    pub const ALL: [InstrumentId; 3] = [InstrumentId::Sus, InstrumentId::Approach, InstrumentId::Empathy];

    pub fn as_str(self) -> &'static str {
        match self {
            InstrumentId::Sus => "SUS",
            InstrumentId::Approach => "APPROACH",
            InstrumentId::Empathy => "EMPATHY",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.as_str().eq_ignore_ascii_case(s))
    }

    pub fn instrument(self) -> &'static Instrument {
        match self {
            InstrumentId::Sus => &SUS,
            InstrumentId::Approach => &APPROACH,
            InstrumentId::Empathy => &EMPATHY,
        }
    }
}

impl fmt::Display for InstrumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Item {
    pub id: &'static str,
    pub text: &'static str,
    pub polarity: Polarity,
}

#[derive(Debug, PartialEq, Eq)]
pub struct Instrument {
    pub id: InstrumentId,
    pub items: &'static [Item],
}

impl Instrument {
    pub fn item(&self, id: &str) -> Option<&'static Item> {
        self.items.iter().find(|i| i.id == id)
    }
}

const fn pos(id: &'static str, text: &'static str) -> Item {
    Item { id, text, polarity: Polarity::Positive }
}

const fn neg(id: &'static str, text: &'static str) -> Item {
    Item { id, text, polarity: Polarity::Negative }
}

pub static SUS: Instrument = Instrument {
    id: InstrumentId::Sus,
    items: &[
        pos("SUS1", "I think that I would like to use this system frequently."),
        neg("SUS2", "I found the system unnecessarily complex."),
        pos("SUS3", "I thought the system was easy to use."),
        neg("SUS4", "I think that I would need the support of a technical person to be able to use this system."),
        pos("SUS5", "I found the various functions in this system were well integrated."),
        neg("SUS6", "I thought there was too much inconsistency in this system."),
        pos("SUS7", "I would imagine that most people would learn to use this system very quickly."),
        neg("SUS8", "I found the system very cumbersome to use."),
        pos("SUS9", "I felt very confident using the system."),
        neg("SUS10", "I needed to learn a lot of things before I could get going with this system."),
    ],
};

pub static APPROACH: Instrument = Instrument {
    id: InstrumentId::Approach,
    items: &[
        pos("APPROACH1", "I found this hybrid method more engaging than digital-only methods."),
        pos("APPROACH2", "I feel that this hybrid method is better than full-digital or full-physical."),
        pos("APPROACH3", "The escape-room style helped me remember my lockdown experience."),
        pos("APPROACH4", "The storytelling style helped me remember my lockdown experience."),
        neg("APPROACH5", "I found the game boring."),
    ],
};

pub static EMPATHY: Instrument = Instrument {
    id: InstrumentId::Empathy,
    items: &[
        pos("EMPATHY1", "The game helped me remember my lockdown experience."),
        pos("EMPATHY2", "I would describe myself as a pretty soft-hearted person."),
        pos("EMPATHY3", "When I think about sad past events of my life, I feel the same sadness."),
        pos("EMPATHY4", "I am often quite touched by things that I see happen."),
        pos("EMPATHY5", "The game helped empathize with my past self."),
    ],
};

/// Looks an item up across every instrument.
pub fn find_item(item_id: &str) -> Option<(InstrumentId, &'static Item)> {
    InstrumentId::ALL.into_iter().find_map(|i| i.instrument().item(item_id).map(|item| (i, item)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(SUS.items.len(), 10);
        assert_eq!(APPROACH.items.len(), 5);
        assert_eq!(EMPATHY.items.len(), 5);
    }

    #[test]
    fn sus_polarity_alternates() {
        for (i, item) in SUS.items.iter().enumerate() {
            let expected = if i % 2 == 0 { Polarity::Positive } else { Polarity::Negative };
            assert_eq!(item.polarity, expected, "{}", item.id);
        }
    }

    #[test]
    fn boring_is_the_only_negative_outside_sus() {
        let negatives: Vec<_> = APPROACH
            .items
            .iter()
            .chain(EMPATHY.items)
            .filter(|i| i.polarity == Polarity::Negative)
            .map(|i| i.text)
            .collect();
        assert_eq!(negatives, ["I found the game boring."]);
    }

    #[test]
    fn lookup() {
        assert_eq!(find_item("EMPATHY5").unwrap().0, InstrumentId::Empathy);
        assert!(find_item("SUS11").is_none());
        assert_eq!(InstrumentId::parse("approach"), Some(InstrumentId::Approach));
    }
}
