#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "medmax/median.hpp"

namespace medmax::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Counts per value rank; rank 0 is the largest value.
class RankCounter {
 public:
  explicit RankCounter(int n) : n_(n), t_(n + 1, 0) {
    top_ = 1;
    while (top_ * 2 <= n_) top_ *= 2;
  }
  void add(int rank, int d) {
    for (int i = rank + 1; i <= n_; i += i & -i) t_[i] += d;
  }
  // Largest k with (count of ranks < k) strictly below the threshold.
  int descend(double threshold) const {
    int pos = 0;
    long long acc = 0;
    for (int step = top_; step > 0; step >>= 1) {
      const int next = pos + step;
      if (next <= n_ && strictly_below(static_cast<double>(acc + t_[next]), threshold)) {
        pos = next;
        acc += t_[next];
      }
    }
    return pos;
  }

 private:
  int n_;
  int top_;
  std::vector<long long> t_;
};

// out[i] = extremum of in[j] over j in [i - len + 1, i] n [0, n_in), for
// i in [0, n_in + len - 1).
void trailing_extremum(const double* in, int n_in, std::ptrdiff_t in_stride, double* out,
                       std::ptrdiff_t out_stride, int len, bool is_max) {
  std::deque<int> dq;
  const int n_out = n_in + len - 1;
  auto better = [&](double a, double b) { return is_max ? a >= b : a <= b; };
  for (int i = 0; i < n_out; ++i) {
    if (i < n_in) {
      const double v = in[i * in_stride];
      while (!dq.empty() && better(v, in[dq.back() * in_stride])) dq.pop_back();
      dq.push_back(i);
    }
    while (!dq.empty() && dq.front() <= i - len) dq.pop_front();
    out[i * out_stride] = dq.empty() ? (is_max ? -kInf : kInf) : in[dq.front() * in_stride];
  }
}

// Fold a grid of box values (indexed by lower corner) onto the cells each
// box covers, keeping the extremum.
void scatter(const std::vector<double>& pos, int pu, int pv, int lu, int lv, int nu, int nv,
             bool is_max, std::vector<double>& cell_acc) {
  std::vector<double> rows(static_cast<std::size_t>(nu) * pv);
  for (int v0 = 0; v0 < pv; ++v0)
    trailing_extremum(pos.data() + static_cast<std::ptrdiff_t>(v0) * pu, pu, 1,
                      rows.data() + static_cast<std::ptrdiff_t>(v0) * nu, 1, lu, is_max);
  std::vector<double> col(nv);
  for (int u = 0; u < nu; ++u) {
    trailing_extremum(rows.data() + u, pv, nu, col.data(), 1, lv, is_max);
    for (int v = 0; v < nv; ++v) {
      double& acc = cell_acc[static_cast<std::size_t>(v) * nu + u];
      acc = is_max ? std::max(acc, col[v]) : std::min(acc, col[v]);
    }
  }
}

// Summed-area table over frame cells: s[(v)*(nu+1)+u] = sum over cells < (u, v).
template <class T>
std::vector<T> summed_area(const Frame& fr, const std::vector<T>& per_cell) {
  const int w = fr.nu + 1;
  std::vector<T> s(static_cast<std::size_t>(w) * (fr.nv + 1), T{});
  for (int v = 0; v < fr.nv; ++v)
    for (int u = 0; u < fr.nu; ++u)
      s[(v + 1) * w + u + 1] = per_cell[v * fr.nu + u] + s[v * w + u + 1] + s[(v + 1) * w + u] -
                               s[v * w + u];
  return s;
}

template <class T>
T box_sum(const std::vector<T>& s, int nu, int u0, int v0, int lu, int lv) {
  const int w = nu + 1;
  return s[(v0 + lv) * w + u0 + lu] - s[v0 * w + u0 + lu] - s[(v0 + lv) * w + u0] + s[v0 * w + u0];
}

}  // namespace

SweepField sweep_boxes(const Basis& basis, std::span<const double> values,
                       std::optional<double> gamma, Window w, bool want_lo) {
  const Space& space = basis.space();
  const Index n = static_cast<Index>(space.size());
  SweepField out;
  out.hi.assign(n, -kInf);
  if (want_lo) out.lo.assign(n, kInf);

  // value ranks, largest first
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> rank(n);
  for (Index i = 0; i < n; ++i)
    rank[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), values[i],
                                                std::greater<>()) -
                               distinct.begin());

  const auto shapes = basis.shapes(w);
  for (std::size_t f = 0; f < basis.frame_count(); ++f) {
    const Frame& fr = basis.frame(f);
    const int nu = fr.nu, nv = fr.nv;
    const std::size_t ncell = static_cast<std::size_t>(nu) * nv;
    std::vector<double> cell_hi(ncell, -kInf), cell_lo(want_lo ? ncell : 0, kInf);

    std::vector<long long> cnt_cell(ncell, 0);
    std::vector<double> sum_cell(ncell, 0.0);
    for (Index i = 0; i < n; ++i) {
      ++cnt_cell[fr.cell_of[i]];
      sum_cell[fr.cell_of[i]] += values[i];
    }
    std::vector<long long> cnt_sat;
    std::vector<double> sum_sat;
    cnt_sat = summed_area(fr, cnt_cell);
    if (!gamma) sum_sat = summed_area(fr, sum_cell);

    RankCounter counter(static_cast<int>(distinct.size()));

    for (const Shape& s : shapes) {
      if (s.frame != static_cast<int>(f)) continue;
      const int lu = s.lu, lv = s.lv;
      const int pu = nu - lu + 1, pv = nv - lv + 1;
      std::vector<double> pos_hi(static_cast<std::size_t>(pu) * pv, -kInf);
      std::vector<double> pos_lo(want_lo ? pos_hi.size() : 0, kInf);
      auto record = [&](int u0, int v0, double val) {
        pos_hi[static_cast<std::size_t>(v0) * pu + u0] = val;
        if (want_lo) pos_lo[static_cast<std::size_t>(v0) * pu + u0] = val;
      };

      if (!gamma) {
        for (int v0 = 0; v0 < pv; ++v0)
          for (int u0 = 0; u0 < pu; ++u0) {
            if (!basis.valid_box(static_cast<int>(f), u0, v0, lu, lv)) continue;
            const long long c = box_sum(cnt_sat, nu, u0, v0, lu, lv);
            if (c == 0) continue;
            record(u0, v0, box_sum(sum_sat, nu, u0, v0, lu, lv) / static_cast<double>(c));
          }
      } else if (basis.dyadic()) {
        for (int v0 = 0; v0 < pv; v0 += lv)
          for (int u0 = 0; u0 < pu; u0 += lu) {
            if (!basis.valid_box(static_cast<int>(f), u0, v0, lu, lv)) continue;
            long long total = 0;
            for (int v = v0; v < v0 + lv; ++v)
              for (int u = u0; u < u0 + lu; ++u)
                for (Index p : fr.points_in(fr.cell(u, v))) {
                  counter.add(rank[p], 1);
                  ++total;
                }
            if (total > 0) record(u0, v0, distinct[counter.descend(*gamma * total)]);
            for (int v = v0; v < v0 + lv; ++v)
              for (int u = u0; u < u0 + lu; ++u)
                for (Index p : fr.points_in(fr.cell(u, v))) counter.add(rank[p], -1);
          }
      } else {
        // Slide along the axis whose cross-section is shorter.
        const bool along_u = lv <= lu;
        const int na = along_u ? nu : nv, nb = along_u ? nv : nu;
        const int la = along_u ? lu : lv, lb = along_u ? lv : lu;
        auto cell_at = [&](int a, int b) { return along_u ? fr.cell(a, b) : fr.cell(b, a); };
        long long total = 0;
        auto slice = [&](int a, int b0, int d) {
          for (int b = b0; b < b0 + lb; ++b)
            for (Index p : fr.points_in(cell_at(a, b))) {
              counter.add(rank[p], d);
              total += d;
            }
        };
        for (int b0 = 0; b0 + lb <= nb; ++b0) {
          for (int a = 0; a < la; ++a) slice(a, b0, 1);
          for (int a0 = 0; a0 + la <= na; ++a0) {
            const int u0 = along_u ? a0 : b0, v0 = along_u ? b0 : a0;
            if (total > 0 && basis.valid_box(static_cast<int>(f), u0, v0, lu, lv))
              record(u0, v0, distinct[counter.descend(*gamma * static_cast<double>(total))]);
            if (a0 + la < na) {
              slice(a0 + la, b0, 1);
              slice(a0, b0, -1);
            }
          }
          for (int a = na - la; a < na; ++a) slice(a, b0, -1);
        }
      }

      if (basis.dyadic()) {
        for (int v0 = 0; v0 < pv; v0 += lv)
          for (int u0 = 0; u0 < pu; u0 += lu) {
            const double hv = pos_hi[static_cast<std::size_t>(v0) * pu + u0];
            for (int v = v0; v < v0 + lv; ++v)
              for (int u = u0; u < u0 + lu; ++u) {
                double& a = cell_hi[static_cast<std::size_t>(v) * nu + u];
                a = std::max(a, hv);
                if (want_lo) {
                  double& b = cell_lo[static_cast<std::size_t>(v) * nu + u];
                  b = std::min(b, pos_lo[static_cast<std::size_t>(v0) * pu + u0]);
                }
              }
          }
      } else {
        scatter(pos_hi, pu, pv, lu, lv, nu, nv, true, cell_hi);
        if (want_lo) scatter(pos_lo, pu, pv, lu, lv, nu, nv, false, cell_lo);
      }
    }

    for (Index i = 0; i < n; ++i) {
      out.hi[i] = std::max(out.hi[i], cell_hi[fr.cell_of[i]]);
      if (want_lo) out.lo[i] = std::min(out.lo[i], cell_lo[fr.cell_of[i]]);
    }
  }
  return out;
}

std::vector<char> sweep_superlevel(const Basis& basis, std::span<const char> in_e, double gamma,
                                   Window w) {
  const Space& space = basis.space();
  const Index n = static_cast<Index>(space.size());
  std::vector<char> covered(n, 0);
  long long e_total = 0;
  for (char c : in_e) e_total += c ? 1 : 0;
  if (e_total == 0) return covered;

  const auto shapes = basis.shapes(w);
  for (std::size_t f = 0; f < basis.frame_count(); ++f) {
    const Frame& fr = basis.frame(f);
    const int nu = fr.nu, nv = fr.nv;
    const std::size_t ncell = static_cast<std::size_t>(nu) * nv;
    std::vector<int> cnt_cell(ncell, 0), e_cell(ncell, 0);
    int eu_lo = nu, eu_hi = -1, ev_lo = nv, ev_hi = -1;
    for (Index i = 0; i < n; ++i) {
      ++cnt_cell[fr.cell_of[i]];
      if (in_e[i]) {
        ++e_cell[fr.cell_of[i]];
        eu_lo = std::min(eu_lo, fr.u_of[i]);
        eu_hi = std::max(eu_hi, fr.u_of[i]);
        ev_lo = std::min(ev_lo, fr.v_of[i]);
        ev_hi = std::max(ev_hi, fr.v_of[i]);
      }
    }
    const auto cnt_sat = summed_area(fr, cnt_cell);
    const auto e_sat = summed_area(fr, e_cell);
    std::vector<int> diff(static_cast<std::size_t>(nu + 1) * (nv + 1), 0);
    const int dw = nu + 1;
    bool any = false;

    for (const Shape& s : shapes) {
      if (s.frame != static_cast<int>(f)) continue;
      const int lu = s.lu, lv = s.lv;
      // Fewest points such a box can hold; if even all of E falls short of
      // gamma times that, no position qualifies.
      double least = static_cast<double>(lu) * lv;
      if (!fr.axis)
        least = std::max(0.0, lu - std::numbers::sqrt2) * std::max(0.0, lv - std::numbers::sqrt2);
      if (strictly_below(static_cast<double>(e_total), gamma * least)) continue;
      int u_first = std::max(0, eu_lo - lu + 1), u_last = std::min(nu - lu, eu_hi);
      int v_first = std::max(0, ev_lo - lv + 1), v_last = std::min(nv - lv, ev_hi);
      int step_u = 1, step_v = 1;
      if (basis.dyadic()) {
        u_first = (eu_lo / lu) * lu;
        v_first = (ev_lo / lv) * lv;
        step_u = lu;
        step_v = lv;
      }
      for (int v0 = v_first; v0 <= v_last; v0 += step_v)
        for (int u0 = u_first; u0 <= u_last; u0 += step_u) {
          const int ce = box_sum(e_sat, nu, u0, v0, lu, lv);
          if (ce == 0) continue;
          const int c = box_sum(cnt_sat, nu, u0, v0, lu, lv);
          if (strictly_below(static_cast<double>(ce), gamma * c)) continue;
          if (!basis.valid_box(static_cast<int>(f), u0, v0, lu, lv)) continue;
          any = true;
          diff[v0 * dw + u0] += 1;
          diff[v0 * dw + u0 + lu] -= 1;
          diff[(v0 + lv) * dw + u0] -= 1;
          diff[(v0 + lv) * dw + u0 + lu] += 1;
        }
    }
    if (!any) continue;
    for (int v = 0; v <= nv; ++v)
      for (int u = 0; u <= nu; ++u) {
        int acc = diff[v * dw + u];
        if (u > 0) acc += diff[v * dw + u - 1];
        if (v > 0) acc += diff[(v - 1) * dw + u];
        if (u > 0 && v > 0) acc -= diff[(v - 1) * dw + u - 1];
        diff[v * dw + u] = acc;
      }
    for (Index i = 0; i < n; ++i)
      if (diff[fr.v_of[i] * dw + fr.u_of[i]] > 0) covered[i] = 1;
  }
  return covered;
}

}  // namespace medmax::detail
