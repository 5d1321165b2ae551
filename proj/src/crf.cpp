#include "sekira/crf.hpp"

#include <algorithm>
#include <cmath>

#include "sekira/errors.hpp"

namespace sekira {
namespace {

void check_shapes(const CrfParams& crf, const Matrix& emissions) {
  if (emissions.rows() == 0) throw UsageError("CRF: empty sentence");
  if (emissions.cols() != crf.num_tags) {
    throw UsageError("CRF: emissions have " + std::to_string(emissions.cols()) +
                     " tag columns, model has " + std::to_string(crf.num_tags));
  }
}

void check_tags(const CrfParams& crf, const Matrix& emissions, const TagSequence& tags) {
  check_shapes(crf, emissions);
  if (tags.size() != emissions.rows()) {
    throw UsageError("CRF: tag sequence length " + std::to_string(tags.size()) +
                     " differs from sentence length " + std::to_string(emissions.rows()));
  }
  for (auto y : tags) {
    if (y >= crf.num_tags) throw UsageError("CRF: tag index out of range");
  }
}

// alpha[t][j]: log-sum of all prefix paths ending in tag j at position t.
Matrix forward_table(const CrfParams& crf, const Matrix& p) {
  const std::size_t n = p.rows(), k = crf.num_tags;
  const auto& a = crf.transitions;
  Matrix alpha(n, k);
  for (std::size_t j = 0; j < k; ++j) alpha(0, j) = a(crf.bos(), j) + p(0, j);
  Vector terms(k);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) terms[i] = alpha(t - 1, i) + a(i, j);
      alpha(t, j) = p(t, j) + log_sum_exp(terms);
    }
  }
  return alpha;
}

// beta[t][i]: log-sum of all suffix paths after position t given tag i there,
// including the final transition into EOS.
Matrix backward_table(const CrfParams& crf, const Matrix& p) {
  const std::size_t n = p.rows(), k = crf.num_tags;
  const auto& a = crf.transitions;
  Matrix beta(n, k);
  for (std::size_t i = 0; i < k; ++i) beta(n - 1, i) = a(i, crf.eos());
  Vector terms(k);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) terms[j] = a(i, j) + p(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(terms);
    }
  }
  return beta;
}

double final_log_sum(const CrfParams& crf, const Matrix& alpha) {
  const std::size_t k = crf.num_tags;
  Vector terms(k);
  for (std::size_t j = 0; j < k; ++j) terms[j] = alpha(alpha.rows() - 1, j) + crf.transitions(j, crf.eos());
  return log_sum_exp(terms);
}

struct TagName {
  char prefix;  // 'O', 'B' or 'I'
  std::string type;
};

TagName parse_tag(const std::string& name) {
  if (name == "O") return {'O', {}};
  if (name.size() > 2 && (name[0] == 'B' || name[0] == 'I') && name[1] == '-') {
    return {name[0], name.substr(2)};
  }
  throw DataError("tag '" + name + "' is not O, B-TYPE or I-TYPE");
}

}  // namespace

CrfParams CrfParams::zeros(std::size_t num_tags) {
  if (num_tags == 0) throw UsageError("CRF needs at least one tag");
  CrfParams crf;
  crf.num_tags = num_tags;
  crf.transitions = Matrix(num_tags + 2, num_tags + 2);
  crf.fixed = Matrix(num_tags + 2, num_tags + 2);
  for (std::size_t s = 0; s < num_tags + 2; ++s) {
    crf.transitions(s, crf.bos()) = kForbidden;
    crf.fixed(s, crf.bos()) = 1.0;
    crf.transitions(crf.eos(), s) = kForbidden;
    crf.fixed(crf.eos(), s) = 1.0;
  }
  // Never used by a non-empty path.
  crf.fixed(crf.bos(), crf.eos()) = 1.0;
  return crf;
}

void CrfParams::mask_gradient(Matrix& grad) const {
  auto g = grad.data();
  auto f = fixed.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f[i] != 0.0) g[i] = 0.0;
  }
}

double sequence_score(const CrfParams& crf, const Matrix& emissions, const TagSequence& tags) {
  check_tags(crf, emissions, tags);
  const auto& a = crf.transitions;
  double score = a(crf.bos(), tags.front());
  for (std::size_t i = 0; i + 1 < tags.size(); ++i) score += a(tags[i], tags[i + 1]);
  score += a(tags.back(), crf.eos());
  for (std::size_t i = 0; i < tags.size(); ++i) score += emissions(i, tags[i]);
  return score;
}

double log_partition(const CrfParams& crf, const Matrix& emissions) {
  check_shapes(crf, emissions);
  return final_log_sum(crf, forward_table(crf, emissions));
}

NllResult nll_loss(const CrfParams& crf, const Matrix& emissions, const TagSequence& gold) {
  check_tags(crf, emissions, gold);
  const std::size_t n = emissions.rows(), k = crf.num_tags;
  const auto& a = crf.transitions;
  const Matrix alpha = forward_table(crf, emissions);
  const Matrix beta = backward_table(crf, emissions);
  const double log_z = final_log_sum(crf, alpha);

  NllResult r;
  r.loss = std::max(0.0, log_z - sequence_score(crf, emissions, gold));
  r.d_emissions = Matrix(n, k);
  r.d_transitions = Matrix(k + 2, k + 2);
  auto& de = r.d_emissions;
  auto& da = r.d_transitions;

  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) de(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z);
  }
  for (std::size_t j = 0; j < k; ++j) {
    da(crf.bos(), j) += de(0, j);
    da(j, crf.eos()) += de(n - 1, j);
  }
  for (std::size_t t = 0; t + 1 < n; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        da(i, j) += std::exp(alpha(t, i) + a(i, j) + emissions(t + 1, j) + beta(t + 1, j) - log_z);
      }
    }
  }

  for (std::size_t t = 0; t < n; ++t) de(t, gold[t]) -= 1.0;
  da(crf.bos(), gold.front()) -= 1.0;
  for (std::size_t t = 0; t + 1 < n; ++t) da(gold[t], gold[t + 1]) -= 1.0;
  da(gold.back(), crf.eos()) -= 1.0;
  crf.mask_gradient(da);
  return r;
}

Decoded viterbi_decode(const CrfParams& crf, const Matrix& emissions) {
  check_shapes(crf, emissions);
  const std::size_t n = emissions.rows(), k = crf.num_tags;
  const auto& a = crf.transitions;
  Matrix delta(n, k);
  std::vector<std::size_t> back(n * k, 0);
  for (std::size_t j = 0; j < k; ++j) delta(0, j) = a(crf.bos(), j) + emissions(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t best_i = 0;
      double best = delta(t - 1, 0) + a(0, j);
      for (std::size_t i = 1; i < k; ++i) {
        const double s = delta(t - 1, i) + a(i, j);
        if (s > best) {
          best = s;
          best_i = i;
        }
      }
      delta(t, j) = best + emissions(t, j);
      back[t * k + j] = best_i;
    }
  }
  std::size_t last = 0;
  double best = delta(n - 1, 0) + a(0, crf.eos());
  for (std::size_t j = 1; j < k; ++j) {
    const double s = delta(n - 1, j) + a(j, crf.eos());
    if (s > best) {
      best = s;
      last = j;
    }
  }
  Decoded d;
  d.tags.resize(n);
  d.tags[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) d.tags[t - 1] = back[t * k + d.tags[t]];
  // Report the path score in the canonical summation order of sequence_score.
  d.score = sequence_score(crf, emissions, d.tags);
  return d;
}

CrfParams constrained_transitions(const std::vector<std::string>& tag_names) {
  std::vector<TagName> parsed;
  parsed.reserve(tag_names.size());
  for (const auto& name : tag_names) parsed.push_back(parse_tag(name));
  CrfParams crf = CrfParams::zeros(tag_names.size());
  const std::size_t k = tag_names.size();
  for (std::size_t to = 0; to < k; ++to) {
    if (parsed[to].prefix != 'I') continue;
    crf.transitions(crf.bos(), to) = kForbidden;
    crf.fixed(crf.bos(), to) = 1.0;
    for (std::size_t from = 0; from < k; ++from) {
      const bool continues = parsed[from].prefix != 'O' && parsed[from].type == parsed[to].type;
      if (continues) continue;
      crf.transitions(from, to) = kForbidden;
      crf.fixed(from, to) = 1.0;
    }
  }
  return crf;
}

}  // namespace sekira
