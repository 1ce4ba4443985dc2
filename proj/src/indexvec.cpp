#include "fpindex/indexvec.hpp"

namespace fpindex {

IndexVector index_vector(const std::vector<Eigen::VectorXd>& memberships,
                         const IndexOptions& options) {
  require(!memberships.empty(), ErrorKind::empty_template,
          "index vector needs at least one minutia");
  const Eigen::Index k = memberships.front().size();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(memberships.size()), k);
  for (std::size_t i = 0; i < memberships.size(); ++i) {
    require(memberships[i].size() == k, ErrorKind::parameter,
            "memberships have different sizes");
    rows.row(static_cast<Eigen::Index>(i)) = memberships[i].transpose();
  }
  return index_vector(rows, options);
}

Eigen::MatrixXd membership_rows(const std::vector<MinutiaDescriptor>& descriptors,
                                const Codebook& cb) {
  cb.validate();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(descriptors.size()), cb.k());
  for (std::size_t i = 0; i < descriptors.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) = membership(descriptors[i], cb).transpose();
  return rows;
}

IndexVector index_from_descriptors(const std::vector<MinutiaDescriptor>& descriptors,
                                   const Codebook& cb, const IndexOptions& options) {
  require(!descriptors.empty(), ErrorKind::empty_template,
          "index vector needs at least one minutia");
  return index_vector(membership_rows(descriptors, cb), options);
}

IndexVector build_index(const GrayImage& img, const std::vector<Minutia>& minutiae,
                        const DescriptorTransform& t, const Codebook& cb,
                        const FeatureParams& params, const IndexOptions& options) {
  const DescribedMinutiae described = describe_all(img, minutiae, t, params);
  return index_from_descriptors(described.descriptors, cb, options);
}

}  // namespace fpindex
