use serde::{Deserialize, Serialize};

use crate::gazetteer::{Gazetteer, GeoPoint};
use crate::schema::GeoName;

pub const GT_UNRESOLVABLE: &str = "gt-unresolvable";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeoConfig {
    pub d_max_km: f64,
    pub earth_radius_km: f64,
}

impl Default for GeoConfig {
    fn default() -> Self {
        GeoConfig {
            d_max_km: 1000.0,
            earth_radius_km: 6371.0,
        }
    }
}

/// Great-circle distance by the haversine formula.
pub fn haversine_km(p1: GeoPoint, p2: GeoPoint, cfg: &GeoConfig) -> f64 {
    let phi1 = p1.lat_deg.to_radians();
    let phi2 = p2.lat_deg.to_radians();
    let d_phi = (p2.lat_deg - p1.lat_deg).to_radians();
    let d_lambda = (p2.lon_deg - p1.lon_deg).to_radians();
    let a = (d_phi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (d_lambda / 2.0).sin().powi(2);
    2.0 * cfg.earth_radius_km * a.clamp(0.0, 1.0).sqrt().asin()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoScore {
    pub score: f64,
    pub distance_km: Option<f64>,
    pub warnings: Vec<String>,
}

/// 1 when the ground truth names no place; 0 when the prediction (or a
/// populated ground truth) cannot be geocoded; else `max(0, 1 - d/d_max)`
/// with each side resolved at its own deepest resolvable level.
pub fn geo_score(pred: &GeoName, gt: &GeoName, gz: &Gazetteer, cfg: &GeoConfig) -> GeoScore {
    if gt.is_empty() {
        return GeoScore {
            score: 1.0,
            distance_km: None,
            warnings: vec![],
        };
    }
    let Some(gt_point) = gz.resolve(gt) else {
        return GeoScore {
            score: 0.0,
            distance_km: None,
            warnings: vec![GT_UNRESOLVABLE.into()],
        };
    };
    let Some(pred_point) = gz.resolve(pred) else {
        return GeoScore {
            score: 0.0,
            distance_km: None,
            warnings: vec![],
        };
    };
    let d = haversine_km(gt_point, pred_point, cfg);
    GeoScore {
        score: score_from_distance(d, cfg),
        distance_km: Some(d),
        warnings: vec![],
    }
}

/// Linear decay from 1 at zero distance to 0 at `d_max_km` and beyond.
pub fn score_from_distance(d: f64, cfg: &GeoConfig) -> f64 {
    (1.0 - d / cfg.d_max_km).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn zero_and_antipodal() {
        let cfg = GeoConfig::default();
        assert_eq!(haversine_km(p(12.0, 34.0), p(12.0, 34.0), &cfg), 0.0);
        // pi * R
        let d = haversine_km(p(0.0, 0.0), p(0.0, 180.0), &cfg);
        assert!((d - 20015.086796).abs() < 0.01, "{d}");
    }

    #[test]
    fn new_york_london() {
        let d = haversine_km(
            p(40.7128, -74.0060),
            p(51.5074, -0.1278),
            &GeoConfig::default(),
        );
        assert!((d - 5570.0).abs() / 5570.0 < 0.005, "{d}");
    }

    #[test]
    fn linear_and_clamped() {
        let cfg = GeoConfig::default();
        assert_eq!(score_from_distance(500.0, &cfg), 0.5);
        assert_eq!(score_from_distance(1000.0, &cfg), 0.0);
        assert_eq!(score_from_distance(1500.0, &cfg), 0.0);
        assert_eq!(score_from_distance(0.0, &cfg), 1.0);
    }

    fn gz() -> Gazetteer {
        Gazetteer::load(
            "country,state_or_province,city,lat,lon\nIndonesia,,,-6.2088,106.8456\nIndonesia,,Jakarta,-6.2088,106.8456\nIndonesia,Bali,Denpasar,-8.6705,115.2126\n".as_bytes(),
        )
        .unwrap()
    }

    #[test]
    fn defaults() {
        let g = gz();
        let cfg = GeoConfig::default();
        let jakarta = GeoName::new(Some("Indonesia"), None, Some("Jakarta"));
        assert_eq!(
            geo_score(&GeoName::default(), &GeoName::default(), &g, &cfg).score,
            1.0
        );
        assert_eq!(
            geo_score(&jakarta, &GeoName::default(), &g, &cfg).score,
            1.0
        );
        assert_eq!(
            geo_score(&GeoName::default(), &jakarta, &g, &cfg).score,
            0.0
        );
        let atlantis = GeoName::new(Some("Atlantis"), None, None);
        let s = geo_score(&jakarta, &atlantis, &g, &cfg);
        assert_eq!(s.score, 0.0);
        assert_eq!(s.warnings, vec![GT_UNRESOLVABLE.to_string()]);
        assert_eq!(geo_score(&atlantis, &jakarta, &g, &cfg).warnings.len(), 0);
        assert_eq!(geo_score(&jakarta, &jakarta, &g, &cfg).score, 1.0);
    }

    #[test]
    fn country_prediction_against_city_truth() {
        let g = gz();
        let cfg = GeoConfig::default();
        let denpasar = GeoName::new(Some("Indonesia"), Some("Bali"), Some("Denpasar"));
        let s = geo_score(
            &GeoName::new(Some("Indonesia"), None, None),
            &denpasar,
            &g,
            &cfg,
        );
        let d = s.distance_km.unwrap();
        assert!(d > 900.0 && d < 1000.0, "{d}");
        assert!((s.score - (1.0 - d / 1000.0)).abs() < 1e-12);
    }
}
