use rug::Complex;

use stirling_xi::numeric::relative_error;
use stirling_xi::riemann_xi::{xi_oracle, xi_series};

#[test]
fn xi_series_matches_quadrature_at_ten_thousand_terms() {
    for (re, im) in [(0.5, 0.0), (2.0, 0.0), (3.0, 0.0), (0.5, 3.0)] {
        let s = Complex::with_val(128, (re, im));
        let series = xi_series(&s, 10_000, 128).unwrap();
        let oracle = xi_oracle(&s, 128).unwrap();
        let err = relative_error(&series.value, &oracle);
        assert!(err <= 1e-3, "s = {re}{im:+}i: relative error {err}");
    }
}
