//! Offline place-name resolution: (country, state_or_province, city)
//! triples to representative coordinates, loaded from a CSV file with the
//! columns `country,state_or_province,city,lat,lon`.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::GeoName;

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("cannot read gazetteer: {0}")]
    Io(#[from] std::io::Error),
    #[error("gazetteer CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("gazetteer header is missing column '{0}'")]
    MissingColumn(&'static str),
    #[error("coordinates out of range: lat {lat}, lon {lon}")]
    OutOfRange { lat: f64, lon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    /// Latitude in [-90, 90], longitude in (-180, 180]; -180 maps to 180.
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self, GazetteerError> {
        let ok = (-90.0..=90.0).contains(&lat_deg) && (-180.0..=180.0).contains(&lon_deg);
        if !ok {
            return Err(GazetteerError::OutOfRange {
                lat: lat_deg,
                lon: lon_deg,
            });
        }
        let lon_deg = if lon_deg == -180.0 { 180.0 } else { lon_deg };
        Ok(GeoPoint { lat_deg, lon_deg })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub country: String,
    pub state_or_province: Option<String>,
    pub city: Option<String>,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeoLevel {
    None,
    Country,
    State,
    City,
}

pub fn deepest_level(name: &GeoName) -> GeoLevel {
    if name.city.is_some() {
        GeoLevel::City
    } else if name.state_or_province.is_some() {
        GeoLevel::State
    } else if name.country.is_some() {
        GeoLevel::Country
    } else {
        GeoLevel::None
    }
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

fn fold_opt(s: Option<&str>) -> Option<String> {
    s.map(fold).filter(|s| !s.is_empty())
}

type Key = (String, String, String);

#[derive(Debug, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    exact: HashMap<Key, usize>,
    // (country, city) ignoring state; a state-less row wins, else the first
    country_city: HashMap<(String, String), usize>,
    city_only: HashMap<String, Vec<usize>>,
    state_only: HashMap<String, Vec<usize>>,
    warnings: Vec<String>,
}

/// The gazetteer shipped with the crate.
pub const BUNDLED_CSV: &str = include_str!("../data/gazetteer.csv");

impl Gazetteer {
    pub fn bundled() -> Self {
        Self::load(BUNDLED_CSV.as_bytes()).expect("bundled gazetteer parses")
    }

    pub fn from_path(path: &Path) -> Result<Self, GazetteerError> {
        Self::load(File::open(path)?)
    }

    /// Loads a gazetteer CSV. Malformed or out-of-range rows are skipped
    /// with a warning; duplicate keys keep the last row.
    pub fn load<R: Read>(source: R) -> Result<Self, GazetteerError> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers()?.clone();
        let col = |name: &'static str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or(GazetteerError::MissingColumn(name))
        };
        let (c_country, c_state, c_city, c_lat, c_lon) = (
            col("country")?,
            col("state_or_province")?,
            col("city")?,
            col("lat")?,
            col("lon")?,
        );

        let mut gz = Gazetteer::default();
        for (i, row) in reader.records().enumerate() {
            // header is line 1
            let line = i + 2;
            let row = match row {
                Ok(r) => r,
                Err(e) => {
                    gz.warnings.push(format!("line {line}: malformed row: {e}"));
                    continue;
                }
            };
            let cell = |c: usize| row.get(c).map(str::trim).filter(|s| !s.is_empty());
            let Some(country) = cell(c_country) else {
                gz.warnings
                    .push(format!("line {line}: malformed row: empty country"));
                continue;
            };
            let coords = cell(c_lat)
                .and_then(|s| s.parse::<f64>().ok())
                .zip(cell(c_lon).and_then(|s| s.parse::<f64>().ok()));
            let Some((lat, lon)) = coords else {
                gz.warnings
                    .push(format!("line {line}: malformed row: bad coordinates"));
                continue;
            };
            let point = match GeoPoint::new(lat, lon) {
                Ok(p) => p,
                Err(e) => {
                    gz.warnings.push(format!("line {line}: rejected: {e}"));
                    continue;
                }
            };
            gz.insert(
                GazetteerEntry {
                    country: country.to_string(),
                    state_or_province: cell(c_state).map(str::to_string),
                    city: cell(c_city).map(str::to_string),
                    point,
                },
                line,
            );
        }
        gz.build_secondary();
        Ok(gz)
    }

    fn insert(&mut self, entry: GazetteerEntry, line: usize) {
        let key = (
            fold(&entry.country),
            entry
                .state_or_province
                .as_deref()
                .map(fold)
                .unwrap_or_default(),
            entry.city.as_deref().map(fold).unwrap_or_default(),
        );
        match self.exact.get(&key) {
            Some(&idx) => {
                self.warnings.push(format!(
                    "line {line}: duplicate entry {key:?}, keeping the later row"
                ));
                self.entries[idx] = entry;
            }
            None => {
                self.exact.insert(key, self.entries.len());
                self.entries.push(entry);
            }
        }
    }

    fn build_secondary(&mut self) {
        for (idx, e) in self.entries.iter().enumerate() {
            let state = fold_opt(e.state_or_province.as_deref());
            match fold_opt(e.city.as_deref()) {
                Some(city) => {
                    let slot = self
                        .country_city
                        .entry((fold(&e.country), city.clone()))
                        .or_insert(idx);
                    if state.is_none() && self.entries[*slot].state_or_province.is_some() {
                        *slot = idx;
                    }
                    self.city_only.entry(city).or_default().push(idx);
                }
                None => {
                    if let Some(state) = state {
                        self.state_only.entry(state).or_default().push(idx);
                    }
                }
            }
        }
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Looks the name up at its deepest level, relaxing the state before
    /// falling back to shallower levels. Exact case-folded matching only.
    pub fn resolve(&self, name: &GeoName) -> Option<GeoPoint> {
        self.resolve_entry(name).map(|e| e.point)
    }

    pub fn resolve_entry(&self, name: &GeoName) -> Option<&GazetteerEntry> {
        let country = fold_opt(name.country.as_deref());
        let state = fold_opt(name.state_or_province.as_deref());
        let city = fold_opt(name.city.as_deref());
        let exact = |c: &str, s: &str, t: &str| {
            self.exact
                .get(&(c.to_string(), s.to_string(), t.to_string()))
                .copied()
        };

        let mut hit = None;
        if let Some(city) = &city {
            hit = match &country {
                Some(c) => state
                    .as_deref()
                    .and_then(|s| exact(c, s, city))
                    .or_else(|| self.country_city.get(&(c.clone(), city.clone())).copied()),
                None => self.city_only.get(city).and_then(|rows| {
                    rows.iter()
                        .copied()
                        .find(|&i| fold_opt(self.entries[i].state_or_province.as_deref()) == state)
                        .or_else(|| rows.first().copied())
                }),
            };
        }
        if hit.is_none() {
            if let Some(state) = &state {
                hit = match &country {
                    Some(c) => exact(c, state, ""),
                    None => self
                        .state_only
                        .get(state)
                        .and_then(|rows| rows.first().copied()),
                };
            }
        }
        if hit.is_none() {
            if let Some(c) = &country {
                hit = exact(c, "", "");
            }
        }
        hit.map(|i| &self.entries[i])
    }
}
