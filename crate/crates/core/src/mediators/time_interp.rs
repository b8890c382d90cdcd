use std::collections::VecDeque;

use crate::scalar::Scalar;

use super::MediatorError;

/// The two most recent `(time, values)` snapshots of one exchanged variable.
#[derive(Debug, Clone, Default)]
pub struct TimeSeriesWindow<S> {
    snapshots: VecDeque<(S, Vec<S>)>,
}

impl<S: Scalar> TimeSeriesWindow<S> {
    pub fn new() -> Self {
        TimeSeriesWindow {
            snapshots: VecDeque::with_capacity(2),
        }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn latest_time(&self) -> Option<S> {
        self.snapshots.back().map(|(t, _)| *t)
    }

    pub fn push(&mut self, time: S, values: Vec<S>) -> Result<(), MediatorError> {
        if let Some(previous) = self.latest_time() {
            if time <= previous || time.is_nan() {
                return Err(MediatorError::NonIncreasingTime {
                    time: time.as_f64(),
                    previous: previous.as_f64(),
                });
            }
        }
        if self.snapshots.len() == 2 {
            self.snapshots.pop_front();
        }
        self.snapshots.push_back((time, values));
        Ok(())
    }
}

/// Linear in time between the two snapshots; holds the latest value at or
/// beyond the latest snapshot.
pub fn interp_time<S: Scalar>(window: &TimeSeriesWindow<S>, t: S) -> Result<Vec<S>, MediatorError> {
    let (first_t, first) = window.snapshots.front().ok_or(MediatorError::NoData)?;
    let (last_t, last) = window.snapshots.back().ok_or(MediatorError::NoData)?;
    if t < *first_t {
        return Err(MediatorError::BeforeWindow {
            requested: t.as_f64(),
            earliest: first_t.as_f64(),
        });
    }
    if t >= *last_t || window.snapshots.len() == 1 {
        return Ok(last.clone());
    }
    let w = (t - *first_t) / (*last_t - *first_t);
    Ok(first
        .iter()
        .zip(last)
        .map(|(&a, &b)| (S::one() - w) * a + w * b)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(points: &[(f64, f64)]) -> TimeSeriesWindow<f64> {
        let mut w = TimeSeriesWindow::new();
        for &(t, v) in points {
            w.push(t, vec![v]).unwrap();
        }
        w
    }

    #[test]
    fn midpoint_nodes_and_hold() {
        let w = window(&[(0.0, 10.0), (1.0, 20.0)]);
        assert_eq!(interp_time(&w, 0.5).unwrap(), vec![15.0]);
        assert_eq!(interp_time(&w, 0.0).unwrap(), vec![10.0]);
        assert_eq!(interp_time(&w, 1.0).unwrap(), vec![20.0]);
        assert_eq!(interp_time(&w, 2.0).unwrap(), vec![20.0]);
        assert!((interp_time(&w, 0.25).unwrap()[0] - 12.5).abs() < 1e-12);
    }

    #[test]
    fn single_snapshot_holds() {
        let w = window(&[(3.0, 7.0)]);
        assert_eq!(interp_time(&w, 3.0).unwrap(), vec![7.0]);
        assert_eq!(interp_time(&w, 9.0).unwrap(), vec![7.0]);
    }

    #[test]
    fn errors() {
        let empty = TimeSeriesWindow::<f64>::new();
        assert!(matches!(
            interp_time(&empty, 0.0),
            Err(MediatorError::NoData)
        ));
        let w = window(&[(1.0, 1.0)]);
        assert!(matches!(
            interp_time(&w, 0.5),
            Err(MediatorError::BeforeWindow { .. })
        ));
        let mut w = window(&[(1.0, 1.0)]);
        assert!(w.push(1.0, vec![2.0]).is_err());
    }

    #[test]
    fn keeps_only_two_snapshots() {
        let w = window(&[(0.0, 0.0), (1.0, 10.0), (2.0, 30.0)]);
        assert_eq!(w.len(), 2);
        assert_eq!(interp_time(&w, 1.5).unwrap(), vec![20.0]);
        assert!(interp_time(&w, 0.5).is_err());
    }
}
