#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace ldgmq {

// Variable-regular (degree db), check-irregular degree distribution.
// w_d is the fraction of symbol columns with check-degree d, and
// v_d = K d w_d / (R db) the fraction of edges in them; the rate follows as
// R = K sum_d d w_d / db.
class degree_distribution {
  public:
    degree_distribution(int db, std::map<int, double> w, int K = 1);
    static degree_distribution regular(int db, int dc, int K = 1);
    /// Build from the edge perspective: v over degrees plus a rate.
    static degree_distribution from_v(int db, const std::map<int, double>& v, double R, int K = 1);

    int db() const { return db_; }
    int K() const { return K_; }
    double rate() const { return R_; }
    const std::map<int, double>& w() const { return w_; }
    const std::map<int, double>& v() const { return v_; }
    double v_at(int d) const;
    double w_at(int d) const;
    int max_degree() const { return w_.empty() ? 0 : w_.rbegin()->first; }

    struct rounded {
        int nb = 0;                      // rows
        double rn = 0;                   // realized rate nb / n
        std::map<int, int> symbol_counts;  // symbols per check-degree
        int repair_moves = 0;            // columns moved between adjacent degrees
    };
    /// Integer realization at block length n via largest-remainder
    /// apportionment, with single-column moves to make db divide the edge
    /// count. The move direction prefers higher degrees.
    rounded round_at(int n) const;

  private:
    int db_;
    int K_;
    double R_;
    std::map<int, double> w_;
    std::map<int, double> v_;
};

}  // namespace ldgmq
