//! Minkowski geometry with signature (+, −, …, −) and c = 1.
//!
//! Light cones are closed: lightlike and coincident points count as causally
//! related. Regions are axis-aligned boxes in (t, x₁, …, xₙ).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalType {
    Timelike,
    Spacelike,
    Lightlike,
    Coincident,
}

impl Event {
    pub fn new(t: f64, x: Vec<f64>) -> Self {
        Self { t, x }
    }

    /// An event in 1+1 dimensions.
    pub fn at(t: f64, x: f64) -> Self {
        Self { t, x: vec![x] }
    }

    pub fn spatial_dims(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }

    fn check_dims(&self, other: &Event) -> Result<()> {
        if self.x.len() != other.x.len() {
            return Err(Error::Dimension(format!(
                "events with {} and {} spatial coordinates",
                self.x.len(),
                other.x.len()
            )));
        }
        Ok(())
    }

    /// Δt² − |Δx|².
    pub fn interval_squared(&self, other: &Event) -> Result<f64> {
        self.check_dims(other)?;
        let dt = other.t - self.t;
        let dx2: f64 = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (b - a) * (b - a))
            .sum();
        Ok(dt * dt - dx2)
    }
}

pub fn interval_type(e1: &Event, e2: &Event) -> Result<IntervalType> {
    let s = e1.interval_squared(e2)?;
    Ok(if e1 == e2 {
        IntervalType::Coincident
    } else if s > 0.0 {
        IntervalType::Timelike
    } else if s < 0.0 {
        IntervalType::Spacelike
    } else {
        IntervalType::Lightlike
    })
}

/// True iff `e` lies in the closed causal past of `p`.
///
/// Mismatched dimensions are never causally related.
pub fn in_backward_lightcone(e: &Event, p: &Event) -> bool {
    match interval_type(e, p) {
        Ok(IntervalType::Spacelike) | Err(_) => false,
        Ok(_) => e.t <= p.t,
    }
}

pub fn is_spacelike(e1: &Event, e2: &Event) -> bool {
    matches!(interval_type(e1, e2), Ok(IntervalType::Spacelike))
}

/// Axis-aligned box; `half_widths[0]` is the temporal half-width, the rest spatial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Event,
    pub half_widths: Vec<f64>,
}

impl Region {
    pub fn new(center: Event, half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.len() != center.spatial_dims() + 1 {
            return Err(Error::Dimension(format!(
                "region in {} spacetime dimensions needs {} half-widths, got {}",
                center.spatial_dims() + 1,
                center.spatial_dims() + 1,
                half_widths.len()
            )));
        }
        if half_widths.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Precondition(
                "region half-widths must be strictly positive".into(),
            ));
        }
        Ok(Self {
            center,
            half_widths,
        })
    }

    /// 1+1 box with equal temporal and spatial half-width.
    pub fn square(t: f64, x: f64, half_width: f64) -> Result<Self> {
        Self::new(Event::at(t, x), vec![half_width, half_width])
    }

    pub fn spatial_dims(&self) -> usize {
        self.center.spatial_dims()
    }

    fn t_range(&self) -> (f64, f64) {
        (
            self.center.t - self.half_widths[0],
            self.center.t + self.half_widths[0],
        )
    }

    fn x_range(&self, axis: usize) -> (f64, f64) {
        let h = self.half_widths[axis + 1];
        (self.center.x[axis] - h, self.center.x[axis] + h)
    }

    pub fn contains(&self, e: &Event) -> bool {
        if e.spatial_dims() != self.spatial_dims() {
            return false;
        }
        let (t0, t1) = self.t_range();
        (t0..=t1).contains(&e.t)
            && (0..self.spatial_dims()).all(|k| {
                let (a, b) = self.x_range(k);
                (a..=b).contains(&e.x[k])
            })
    }

    /// True iff `other` is a sub-box of `self`.
    pub fn contains_region(&self, other: &Region) -> bool {
        if other.spatial_dims() != self.spatial_dims() {
            return false;
        }
        let (t0, t1) = self.t_range();
        let (u0, u1) = other.t_range();
        t0 <= u0
            && u1 <= t1
            && (0..self.spatial_dims()).all(|k| {
                let (a, b) = self.x_range(k);
                let (c, d) = other.x_range(k);
                a <= c && d <= b
            })
    }

    /// Smallest spatial distance between the boxes' spatial projections.
    fn spatial_gap(&self, other: &Region) -> f64 {
        (0..self.spatial_dims())
            .map(|k| {
                let d = (self.center.x[k] - other.center.x[k]).abs()
                    - self.half_widths[k + 1]
                    - other.half_widths[k + 1];
                d.max(0.0).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Point of the box closest (in every coordinate) to `e`, at the earliest time.
    fn earliest_nearest_point(&self, e: &Event) -> Event {
        let x = (0..self.spatial_dims())
            .map(|k| {
                let (a, b) = self.x_range(k);
                e.x[k].clamp(a, b)
            })
            .collect();
        Event::new(self.t_range().0, x)
    }

    /// True iff some point of the box lies in the closed causal past of `e`.
    pub fn in_causal_past_of(&self, e: &Event) -> bool {
        e.spatial_dims() == self.spatial_dims()
            && in_backward_lightcone(&self.earliest_nearest_point(e), e)
    }

    /// Uniform sample of a point inside the box.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Event {
        let (t0, t1) = self.t_range();
        let x = (0..self.spatial_dims())
            .map(|k| {
                let (a, b) = self.x_range(k);
                rng.gen_range(a..=b)
            })
            .collect();
        Event::new(rng.gen_range(t0..=t1), x)
    }
}

/// True iff every point of `r1` is spacelike to every point of `r2`.
///
/// For boxes the minimal spatial separation and the maximal time separation
/// are attained independently, so comparing the two is exact.
pub fn regions_spacelike_separated(r1: &Region, r2: &Region) -> Result<bool> {
    if r1.spatial_dims() != r2.spatial_dims() {
        return Err(Error::Dimension(format!(
            "regions with {} and {} spatial coordinates",
            r1.spatial_dims(),
            r2.spatial_dims()
        )));
    }
    let max_dt = (r1.center.t - r2.center.t).abs() + r1.half_widths[0] + r2.half_widths[0];
    Ok(r1.spatial_gap(r2) > max_dt)
}

/// A piecewise causal trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorldLine {
    points: Vec<Event>,
}

impl WorldLine {
    pub fn new(points: Vec<Event>) -> Result<Self> {
        for pair in points.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::Precondition(format!(
                    "world-line times must increase strictly ({} then {})",
                    pair[0].t, pair[1].t
                )));
            }
            if interval_type(&pair[0], &pair[1])? == IntervalType::Spacelike {
                return Err(Error::Precondition(format!(
                    "world-line segment from t={} to t={} is spacelike",
                    pair[0].t, pair[1].t
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Event] {
        &self.points
    }
}

/// Partial order "happens causally before" over a list of events.
///
/// Event `i` precedes `j` when `i` lies in the closed past cone of `j` and the
/// two are at distinct points. Pairs related in neither direction are
/// incomparable.
#[derive(Clone, Debug)]
pub struct CausalOrder {
    precedes: Vec<Vec<bool>>,
}

impl CausalOrder {
    pub fn new(events: &[&Event]) -> Self {
        let n = events.len();
        let mut precedes = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                precedes[i][j] =
                    i != j && events[i] != events[j] && in_backward_lightcone(events[i], events[j]);
            }
        }
        Self { precedes }
    }

    pub fn len(&self) -> usize {
        self.precedes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.precedes.is_empty()
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.precedes[i][j]
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.precedes[i][j] || self.precedes[j][i]
    }

    pub fn incomparable_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.comparable(i, j))
            .collect()
    }

    /// Topological sort choosing, among ready events, the one ranked first by `rank`.
    pub fn sort_by_key<K: Ord>(&self, rank: impl Fn(usize) -> K) -> Vec<usize> {
        let n = self.len();
        let mut placed = vec![false; n];
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let next = (0..n)
                .filter(|&j| !placed[j] && (0..n).all(|i| placed[i] || !self.precedes[i][j]))
                .min_by_key(|&j| rank(j))
                .expect("closed light cones on distinct points are acyclic");
            placed[next] = true;
            out.push(next);
        }
        out
    }

    /// Topological sort keeping input order among ready events.
    pub fn stable_order(&self) -> Vec<usize> {
        self.sort_by_key(|i| i)
    }

    /// Topological sort preferring the latest-listed ready event.
    pub fn reverse_stable_order(&self) -> Vec<usize> {
        self.sort_by_key(std::cmp::Reverse)
    }

    /// Every linear extension of the order, in lexicographic order of index sequences.
    pub fn linear_extensions(&self) -> Vec<Vec<usize>> {
        fn extend(
            order: &CausalOrder,
            placed: &mut Vec<bool>,
            prefix: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let n = order.len();
            if prefix.len() == n {
                out.push(prefix.clone());
                return;
            }
            for j in 0..n {
                if !placed[j] && (0..n).all(|i| placed[i] || !order.precedes[i][j]) {
                    placed[j] = true;
                    prefix.push(j);
                    extend(order, placed, prefix, out);
                    prefix.pop();
                    placed[j] = false;
                }
            }
        }
        let mut out = Vec::new();
        extend(self, &mut vec![false; self.len()], &mut Vec::new(), &mut out);
        out
    }
}

#[derive(Clone, Debug)]
pub struct PastEntry<'a, T> {
    /// Position in the caller's list.
    pub index: usize,
    pub event: &'a Event,
    pub payload: &'a T,
}

#[derive(Clone, Debug)]
pub struct CausalPast<'a, T> {
    /// Events in the closed past cone, past-first; incomparable events keep input order.
    pub entries: Vec<PastEntry<'a, T>>,
    /// Pairs of caller indices related in neither causal direction.
    pub incomparable: Vec<(usize, usize)>,
}

pub fn causal_past_events<'a, T>(p: &Event, events: &'a [(Event, T)]) -> CausalPast<'a, T> {
    let inside: Vec<usize> = (0..events.len())
        .filter(|&i| in_backward_lightcone(&events[i].0, p))
        .collect();
    let locations: Vec<&Event> = inside.iter().map(|&i| &events[i].0).collect();
    let order = CausalOrder::new(&locations);
    let entries = order
        .stable_order()
        .into_iter()
        .map(|k| PastEntry {
            index: inside[k],
            event: &events[inside[k]].0,
            payload: &events[inside[k]].1,
        })
        .collect();
    let incomparable = order
        .incomparable_pairs()
        .into_iter()
        .map(|(a, b)| (inside[a], inside[b]))
        .collect();
    CausalPast {
        entries,
        incomparable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_examples() {
        let o = Event::at(0.0, 0.0);
        assert_eq!(interval_type(&o, &Event::at(1.0, 0.0)).unwrap(), IntervalType::Timelike);
        assert_eq!(interval_type(&o, &Event::at(0.0, 1.0)).unwrap(), IntervalType::Spacelike);
        assert_eq!(interval_type(&o, &Event::at(1.0, 1.0)).unwrap(), IntervalType::Lightlike);
        assert_eq!(interval_type(&o, &o).unwrap(), IntervalType::Coincident);
    }

    #[test]
    fn interval_dimension_mismatch() {
        let a = Event::at(0.0, 0.0);
        let b = Event::new(0.0, vec![0.0, 1.0]);
        assert!(matches!(interval_type(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn backward_cone_examples() {
        let p = Event::at(2.0, 1.0);
        assert!(in_backward_lightcone(&p, &p));
        assert!(in_backward_lightcone(&Event::at(0.0, 0.0), &p));
        assert!(!in_backward_lightcone(&Event::at(0.0, 3.0), &Event::at(1.0, 0.0)));
        // future-directed, not past
        assert!(!in_backward_lightcone(&Event::at(3.0, 1.0), &p));
    }

    #[test]
    fn region_separation_examples() {
        let left = Region::square(0.0, -5.0, 1.0).unwrap();
        let right = Region::square(0.0, 5.0, 1.0).unwrap();
        assert!(regions_spacelike_separated(&left, &right).unwrap());

        let outer = Region::square(0.0, 0.0, 2.0).unwrap();
        let inner = Region::square(0.0, 0.0, 1.0).unwrap();
        assert!(!regions_spacelike_separated(&outer, &inner).unwrap());

        let early = Region::square(0.0, 0.0, 1.0).unwrap();
        let late = Region::square(10.0, 0.0, 1.0).unwrap();
        assert!(!regions_spacelike_separated(&early, &late).unwrap());
    }

    #[test]
    fn touching_light_cone_is_not_spacelike() {
        // spatial gap 2 equals the largest time difference: corners are lightlike
        let a = Region::square(0.0, 0.0, 1.0).unwrap();
        let b = Region::square(0.0, 4.0, 1.0).unwrap();
        assert!(!regions_spacelike_separated(&a, &b).unwrap());
    }

    #[test]
    fn region_rejects_nonpositive_width() {
        assert!(Region::new(Event::at(0.0, 0.0), vec![1.0, 0.0]).is_err());
        assert!(Region::new(Event::at(0.0, 0.0), vec![1.0]).is_err());
    }

    #[test]
    fn worldline_rejects_spacelike_segment() {
        assert!(WorldLine::new(vec![Event::at(0.0, 0.0), Event::at(1.0, 0.5)]).is_ok());
        assert!(WorldLine::new(vec![Event::at(0.0, 0.0), Event::at(1.0, 1.0)]).is_ok());
        assert!(WorldLine::new(vec![Event::at(0.0, 0.0), Event::at(1.0, 2.0)]).is_err());
        assert!(WorldLine::new(vec![Event::at(1.0, 0.0), Event::at(1.0, 0.0)]).is_err());
    }

    #[test]
    fn empty_past() {
        let events: Vec<(Event, ())> = vec![];
        let past = causal_past_events(&Event::at(0.0, 0.0), &events);
        assert!(past.entries.is_empty());
        assert!(past.incomparable.is_empty());
    }

    #[test]
    fn charlie_sees_both_spacelike_records() {
        let events = vec![(Event::at(1.0, -1.0), "alice"), (Event::at(1.0, 1.0), "bob")];
        let past = causal_past_events(&Event::at(3.0, 0.0), &events);
        let seen: Vec<&str> = past.entries.iter().map(|e| *e.payload).collect();
        assert_eq!(seen, ["alice", "bob"]);
        assert_eq!(past.incomparable, [(0, 1)]);

        let bob_view = causal_past_events(&Event::at(2.0, 1.0), &events);
        let seen: Vec<&str> = bob_view.entries.iter().map(|e| *e.payload).collect();
        assert_eq!(seen, ["bob"]);
    }

    #[test]
    fn causal_order_puts_past_first() {
        let events = vec![(Event::at(2.0, 0.0), "late"), (Event::at(0.0, 0.0), "early")];
        let past = causal_past_events(&Event::at(5.0, 0.0), &events);
        let seen: Vec<&str> = past.entries.iter().map(|e| *e.payload).collect();
        assert_eq!(seen, ["early", "late"]);
        assert!(past.incomparable.is_empty());
    }

    #[test]
    fn linear_extensions_of_antichain() {
        let a = Event::at(0.0, 0.0);
        let b = Event::at(0.0, 5.0);
        let c = Event::at(0.0, 10.0);
        let order = CausalOrder::new(&[&a, &b, &c]);
        assert_eq!(order.linear_extensions().len(), 6);
        assert_eq!(order.stable_order(), [0, 1, 2]);
        assert_eq!(order.reverse_stable_order(), [2, 1, 0]);
    }

    #[test]
    fn forward_cone_of_region() {
        let prep = Region::square(0.0, 0.0, 0.5).unwrap();
        assert!(prep.in_causal_past_of(&Event::at(1.0, -1.0)));
        assert!(prep.in_causal_past_of(&Event::at(-0.5, 0.0)));
        assert!(!prep.in_causal_past_of(&Event::at(0.0, 3.0)));
    }
}
