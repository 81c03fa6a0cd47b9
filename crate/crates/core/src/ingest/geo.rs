//! Admin-1 boundaries, the centroid-to-region join, and nearest-university
//! distances.

use std::collections::BTreeMap;

use geo::{BoundingRect, Centroid, Distance, Haversine, Intersects, MultiPolygon, Point, Rect};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DistanceMode, GeoAssignment, LanguageRecord};

#[derive(Debug, Clone)]
pub struct Boundary {
    pub country: String,
    pub admin1: String,
    pub shape: MultiPolygon<f64>,
    bbox: Rect<f64>,
    centroid: Point<f64>,
}

impl Boundary {
    pub fn new(country: String, admin1: String, shape: MultiPolygon<f64>) -> Result<Self> {
        let (Some(bbox), Some(centroid)) = (shape.bounding_rect(), shape.centroid()) else {
            return Err(Error::DegenerateInput(format!("empty boundary for {country}/{admin1}")));
        };
        Ok(Self {
            country,
            admin1,
            shape,
            bbox,
            centroid,
        })
    }

    pub fn centroid(&self) -> Point<f64> {
        self.centroid
    }
}

/// Read a GeoJSON FeatureCollection whose features carry `country` and
/// `admin1` string properties and Polygon or MultiPolygon geometries.
pub fn parse_boundaries(bytes: &[u8]) -> Result<Vec<Boundary>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("boundaries: {e}")))?;
    let fc: geojson::FeatureCollection = text
        .parse()
        .map_err(|e: geojson::Error| Error::parse(0, format!("boundaries: {e}")))?;
    let mut out = Vec::with_capacity(fc.features.len());
    for (i, f) in fc.features.into_iter().enumerate() {
        let prop = |k: &str| {
            f.property(k)
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .ok_or_else(|| Error::parse(0, format!("feature {i}: missing string property `{k}`")))
        };
        let (country, admin1) = (prop("country")?, prop("admin1")?);
        let geometry = f
            .geometry
            .clone()
            .ok_or_else(|| Error::parse(0, format!("feature {i}: no geometry")))?;
        let shape = match geo::Geometry::<f64>::try_from(geometry) {
            Ok(geo::Geometry::Polygon(p)) => MultiPolygon(vec![p]),
            Ok(geo::Geometry::MultiPolygon(mp)) => mp,
            _ => {
                return Err(Error::parse(
                    0,
                    format!("feature {i}: geometry must be a Polygon or MultiPolygon"),
                ))
            }
        };
        out.push(Boundary::new(country, admin1, shape)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinMethod {
    /// Centroid inside (or on the edge of) the region.
    Contained,
    /// No region contains the centroid; closest region centroid used.
    NearestCentroid,
    /// Taken from the registry's own country/admin1 fields.
    Registry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinedLocation {
    #[serde(flatten)]
    pub assignment: GeoAssignment,
    pub method: JoinMethod,
}

/// Assign every language to the admin-1 region containing its centroid.
/// Ties on shared edges go to the smallest admin1 code.
pub fn geo_join(
    records: &[LanguageRecord],
    boundaries: &[Boundary],
) -> Result<BTreeMap<String, JoinedLocation>> {
    if boundaries.is_empty() {
        return Err(Error::NoBoundaries);
    }
    let key = |b: &Boundary| (b.admin1.clone(), b.country.clone());
    let mut out = BTreeMap::new();
    for r in records {
        let p = Point::new(r.centroid_lon, r.centroid_lat);
        let contained = boundaries
            .iter()
            .filter(|b| b.bbox.intersects(&p) && b.shape.intersects(&p))
            .min_by_key(|b| key(b));
        let (b, method) = match contained {
            Some(b) => (b, JoinMethod::Contained),
            None => {
                let b = boundaries
                    .iter()
                    .map(|b| {
                        let d = (b.centroid.x() - p.x()).hypot(b.centroid.y() - p.y());
                        (d, b)
                    })
                    .min_by(|x, y| x.0.total_cmp(&y.0).then_with(|| key(x.1).cmp(&key(y.1))))
                    .map(|(_, b)| b)
                    .expect("boundaries is nonempty");
                (b, JoinMethod::NearestCentroid)
            }
        };
        out.insert(
            r.glottocode.clone(),
            JoinedLocation {
                assignment: GeoAssignment {
                    country: b.country.clone(),
                    admin1: Some(b.admin1.clone()),
                },
                method,
            },
        );
    }
    Ok(out)
}

/// Locations straight from the registry, for datasets without boundaries.
pub fn registry_locations(records: &[LanguageRecord]) -> BTreeMap<String, JoinedLocation> {
    records
        .iter()
        .map(|r| {
            (
                r.glottocode.clone(),
                JoinedLocation {
                    assignment: GeoAssignment {
                        country: r.primary_country.clone(),
                        admin1: r.admin1.clone(),
                    },
                    method: JoinMethod::Registry,
                },
            )
        })
        .collect()
}

/// Distance from `(lat, lon)` to the closest university: planar distance in
/// degrees, or great-circle kilometres.
pub fn nearest_university_distance(
    centroid: (f64, f64),
    universities: &[(f64, f64)],
    mode: DistanceMode,
) -> Result<f64> {
    if universities.is_empty() {
        return Err(Error::EmptyInput("universities"));
    }
    let (lat, lon) = centroid;
    let d = |&(ulat, ulon): &(f64, f64)| match mode {
        DistanceMode::Euclidean => (lat - ulat).hypot(lon - ulon),
        DistanceMode::GreatCircle => {
            Haversine.distance(Point::new(lon, lat), Point::new(ulon, ulat)) / 1000.0
        }
    };
    Ok(universities.iter().map(d).fold(f64::INFINITY, f64::min))
}
