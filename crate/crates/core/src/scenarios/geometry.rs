use num_traits::{Signed, Zero};

use crate::rational::{q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Point {
    pub x: Q,
    pub y: Q,
}

impl Point {
    pub fn new(x: Q, y: Q) -> Self {
        Point { x, y }
    }

    pub fn dist2(&self, o: &Point) -> Q {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }
}

fn orient(a: &Point, b: &Point, c: &Point) -> i8 {
    let v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let (o1, o2, o3, o4) = (
        orient(a, b, c),
        orient(a, b, d),
        orient(c, d, a),
        orient(c, d, b),
    );
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

fn inside(poly: &[Point], p: &Point) -> bool {
    let mut odd = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                odd = !odd;
            }
        }
    }
    odd
}

/// True when the segment `a`-`b` touches or enters the polygon.
pub fn segment_blocked(a: Point, b: Point, poly: &[Point]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    if inside(poly, &a) || inside(poly, &b) {
        return true;
    }
    let n = poly.len();
    (0..n).any(|i| segments_touch(&a, &b, &poly[i], &poly[(i + 1) % n]))
}

/// Link rate in bits per second from range and line of sight.
pub fn geometric_rates(a: Point, b: Point, obstacles: &[Vec<Point>]) -> Q {
    if obstacles.iter().any(|poly| segment_blocked(a, b, poly)) {
        return Q::zero();
    }
    let d2 = a.dist2(&b);
    if d2 <= q(25) {
        q(11_000_000)
    } else if d2 <= q(225) {
        q(5_500_000)
    } else if d2 <= q(40_000) {
        q(1_000_000)
    } else {
        Q::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i128, y: i128) -> Point {
        Point::new(q(x), q(y))
    }

    #[test]
    fn range_tiers() {
        assert_eq!(geometric_rates(pt(0, 0), pt(3, 0), &[]), q(11_000_000));
        assert_eq!(geometric_rates(pt(0, 0), pt(5, 0), &[]), q(11_000_000));
        assert_eq!(geometric_rates(pt(0, 0), pt(10, 0), &[]), q(5_500_000));
        assert_eq!(geometric_rates(pt(0, 0), pt(100, 0), &[]), q(1_000_000));
        assert_eq!(geometric_rates(pt(0, 0), pt(200, 0), &[]), q(1_000_000));
        assert_eq!(geometric_rates(pt(0, 0), pt(201, 0), &[]), q(0));
    }

    #[test]
    fn obstruction_blocks_any_range() {
        let wall = vec![pt(1, -1), pt(2, -1), pt(2, 1), pt(1, 1)];
        assert_eq!(geometric_rates(pt(0, 0), pt(3, 0), &[wall.clone()]), q(0));
        assert_eq!(geometric_rates(pt(0, 0), pt(100, 0), &[wall.clone()]), q(0));
        assert_eq!(geometric_rates(pt(0, 5), pt(3, 5), &[wall]), q(11_000_000));
    }
}
