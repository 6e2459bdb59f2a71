//! Closed label sets for the soft-biometric attributes.
//!
//! Every set carries an `Unknown` member; a query field set to `Unknown`
//! disables the matching filter stage. Labels are the lower-cased attribute
//! names used in annotation and query documents. Parsing is case-insensitive,
//! treats `_` as a space, and accepts `NA` as an alias for `unknown`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

fn normalize(raw: &str) -> String {
    raw.trim().to_ascii_lowercase().replace('_', " ")
}

macro_rules! label_set {
    (
        $(#[$meta:meta])*
        $name:ident, $kind:literal {
            $( $variant:ident => $label:literal $(| $alias:literal)* ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $( $variant ),+
        }

        impl $name {
            /// Every member, in taxonomy order.
            pub const ALL: &'static [$name] = &[ $( $name::$variant ),+ ];

            pub fn label(self) -> &'static str {
                match self {
                    $( $name::$variant => $label ),+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(raw: &str) -> Result<Self, Error> {
                let key = normalize(raw);
                $(
                    if key == $label $(|| key == $alias)* {
                        return Ok($name::$variant);
                    }
                )+
                Err(Error::Taxonomy { kind: $kind, label: raw.to_string() })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.label())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_set! {
    /// Clothing colors plus `skin`.
    Color, "color" {
        Unknown => "unknown" | "na" | "n/a",
        Black => "black",
        Blue => "blue",
        Brown => "brown",
        Green => "green",
        Grey => "grey" | "gray",
        Orange => "orange",
        Pink => "pink",
        Purple => "purple",
        Red => "red",
        White => "white",
        Yellow => "yellow",
        Skin => "skin",
    }
}

label_set! {
    TorsoType, "torso type" {
        Unknown => "unknown" | "na" | "n/a",
        LongSleeve => "long sleeve",
        ShortSleeve => "short sleeve",
        NoSleeve => "no sleeve",
        IndianKurta => "indian kurta/dress",
    }
}

label_set! {
    LegType, "leg type" {
        Unknown => "unknown" | "na" | "n/a",
        LongPants => "long pants",
        Dress => "dress",
        Skirt => "skirt",
        LongShorts => "long shorts",
        ShortShorts => "short shorts",
        IndianKurta => "indian kurta/dress",
    }
}

label_set! {
    Gender, "gender" {
        Unknown => "unknown" | "na" | "n/a",
        Male => "male",
        Female => "female",
    }
}

label_set! {
    HeightClass, "height class" {
        Unknown => "unknown" | "na" | "n/a",
        VeryShort => "very short",
        Short => "short",
        Average => "average",
        Tall => "tall",
        VeryTall => "very tall",
    }
}

label_set! {
    /// Per-sequence challenge level.
    Difficulty, "difficulty" {
        VeryEasy => "very easy",
        Easy => "easy",
        Medium => "medium",
        Hard => "hard",
    }
}

macro_rules! unknown_default {
    ($($name:ident),+) => {
        $(
            impl Default for $name {
                fn default() -> Self {
                    $name::Unknown
                }
            }

            impl $name {
                pub fn is_unknown(self) -> bool {
                    self == $name::Unknown
                }
            }
        )+
    };
}

unknown_default!(Color, TorsoType, LegType, Gender, HeightClass);

impl Color {
    /// The twelve labels a classifier may emit (everything except `Unknown`).
    pub fn culture_colors() -> &'static [Color] {
        &Color::ALL[1..]
    }
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
            Gender::Unknown => Gender::Unknown,
        }
    }
}

impl HeightClass {
    /// Inclusive height range in centimeters; `None` for `Unknown`.
    pub fn range_cm(self) -> Option<(f64, f64)> {
        match self {
            HeightClass::Unknown => None,
            HeightClass::VeryShort => Some((130.0, 160.0)),
            HeightClass::Short => Some((150.0, 170.0)),
            HeightClass::Average => Some((160.0, 180.0)),
            HeightClass::Tall => Some((170.0, 190.0)),
            HeightClass::VeryTall => Some((180.0, 210.0)),
        }
    }

    /// Class whose range midpoint is closest to `height_cm`.
    pub fn nearest(height_cm: f64) -> HeightClass {
        HeightClass::ALL[1..]
            .iter()
            .copied()
            .min_by(|a, b| {
                let da = a.midpoint_distance(height_cm);
                let db = b.midpoint_distance(height_cm);
                da.total_cmp(&db)
            })
            .unwrap_or(HeightClass::Unknown)
    }

    fn midpoint_distance(self, height_cm: f64) -> f64 {
        match self.range_cm() {
            Some((lo, hi)) => (0.5 * (lo + hi) - height_cm).abs(),
            None => f64::INFINITY,
        }
    }
}
