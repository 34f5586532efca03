//! Waypoint routes with per-waypoint arrival times.

use crate::geom::{polyline_length, Vec2};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("route needs at least {0} waypoints")]
    TooShort(usize),
    #[error("waypoint and arrival lists differ in length")]
    LengthMismatch,
    #[error("arrival times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed route csv at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Ordered waypoints with arrival times; `arrivals[0]` is the departure time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub waypoints: Vec<Vec2>,
    pub arrivals: Vec<f64>,
}

impl Route {
    pub fn new(waypoints: Vec<Vec2>, arrivals: Vec<f64>) -> Result<Self, RouteError> {
        let r = Route { waypoints, arrivals };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        if self.waypoints.len() != self.arrivals.len() {
            return Err(RouteError::LengthMismatch);
        }
        if self.waypoints.is_empty() {
            return Err(RouteError::TooShort(1));
        }
        for (i, w) in self.arrivals.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(RouteError::NotIncreasing(i + 1));
            }
        }
        Ok(())
    }

    pub fn departure(&self) -> f64 {
        self.arrivals[0]
    }

    pub fn arrival(&self) -> f64 {
        self.arrivals[self.arrivals.len() - 1]
    }

    pub fn travel_time(&self) -> f64 {
        self.arrival() - self.departure()
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.waypoints)
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// CSV with header `idx,x,y,t_arrival`; reals in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "idx,x,y,t_arrival")?;
        for (i, (p, t)) in self.waypoints.iter().zip(&self.arrivals).enumerate() {
            writeln!(w, "{i},{},{},{}", p.x, p.y, t)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, RouteError> {
        let mut waypoints = Vec::new();
        let mut arrivals = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if n == 0 {
                if line != "idx,x,y,t_arrival" {
                    return Err(RouteError::Parse {
                        line: 1,
                        msg: format!("unexpected header '{line}'"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(RouteError::Parse {
                    line: n + 1,
                    msg: "expected 4 columns".into(),
                });
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| RouteError::Parse {
                    line: n + 1,
                    msg: e.to_string(),
                })
            };
            waypoints.push(Vec2::new(num(cols[1])?, num(cols[2])?));
            arrivals.push(num(cols[3])?);
        }
        Route::new(waypoints, arrivals)
    }
}
