#include <cstdio>
#include <sstream>

#include "pdna/preprocess.hpp"

namespace pdna {

EncodedMatrix encode(const VoteDataset& d) {
  EncodedMatrix z;
  z.values.resize(static_cast<Eigen::Index>(d.num_voters()), static_cast<Eigen::Index>(d.num_bills()));
  for (std::size_t i = 0; i < d.num_voters(); ++i)
    for (std::size_t j = 0; j < d.num_bills(); ++j)
      z.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<int>(d.vote(i, j));
  for (const auto& v : d.voters()) z.row_ids.push_back(v.id);
  for (const auto& b : d.bills()) z.col_ids.push_back(b.id);
  return z;
}

std::string standardized_csv(const StandardizedMatrix& x) {
  std::ostringstream out;
  out << "voter_id";
  for (const auto& id : x.col_ids) out << ',' << id;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out << x.row_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", x.values(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pdna
