#include "cfkit/bias.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "cfkit/text.hpp"

namespace cfkit {

BiasModel fit_bias(const RatingsMatrix& m, double alpha_item, double alpha_user) {
  if (alpha_item < 0 || alpha_user < 0)
    throw std::invalid_argument("fit_bias: damping constants must be nonnegative");
  if (m.rating_count() == 0) throw DataError("fit_bias: empty matrix, global mean undefined");

  BiasModel model;
  model.alpha_item = alpha_item;
  model.alpha_user = alpha_user;
  model.users = m.users();
  model.items = m.items();
  model.global_mean = *compute_stats(m).global_mean();

  model.item_offset.assign(m.item_count(), 0.0);
  for (ItemIndex i = 0; i < m.item_count(); ++i) {
    auto row = m.users_of(i);
    if (row.empty()) continue;  // offset stays exactly 0
    double sum = 0.0;
    for (const auto& e : row) sum += e.value - model.global_mean;
    model.item_offset[i] = sum / (static_cast<double>(row.size()) + alpha_item);
  }

  model.user_offset.assign(m.user_count(), 0.0);
  for (UserIndex u = 0; u < m.user_count(); ++u) {
    auto row = m.items_of(u);
    if (row.empty()) continue;
    double sum = 0.0;
    for (const auto& e : row) sum += e.value - model.item_offset[e.id] - model.global_mean;
    model.user_offset[u] = sum / (static_cast<double>(row.size()) + alpha_user);
  }
  return model;
}

double predict_bias(const BiasModel& model, std::optional<UserIndex> u,
                    std::optional<ItemIndex> i) {
  return model.predict(u, i);
}

namespace {

void check_token(const std::string& token) {
  for (char c : token)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw DataError("model serialization: token contains whitespace: '" + token + "'");
}

}  // namespace

void write_bias_model(std::ostream& out, const BiasModel& model) {
  out << "g " << format_real(model.global_mean) << "\n";
  for (ItemIndex i = 0; i < model.item_offset.size(); ++i) {
    check_token(model.items.token(i));
    out << "i " << model.items.token(i) << " " << format_real(model.item_offset[i]) << "\n";
  }
  for (UserIndex u = 0; u < model.user_offset.size(); ++u) {
    check_token(model.users.token(u));
    out << "u " << model.users.token(u) << " " << format_real(model.user_offset[u]) << "\n";
  }
}

BiasModel read_bias_model(std::istream& in) {
  BiasModel model;
  bool have_global = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&](const std::string& why) {
      throw DataError("bias model line " + std::to_string(lineno) + ": " + why);
    };
    if (tag == "g") {
      std::string v;
      if (!(ls >> v)) fail("missing value");
      auto parsed = parse_real(v);
      if (!parsed) fail("bad real '" + v + "'");
      model.global_mean = *parsed;
      have_global = true;
    } else if (tag == "i" || tag == "u") {
      std::string token, v;
      if (!(ls >> token >> v)) fail("expected '<tag> <token> <value>'");
      auto parsed = parse_real(v);
      if (!parsed) fail("bad real '" + v + "'");
      if (tag == "i") {
        auto idx = model.items.intern(token);
        if (idx != model.item_offset.size()) fail("duplicate item token '" + token + "'");
        model.item_offset.push_back(*parsed);
      } else {
        auto idx = model.users.intern(token);
        if (idx != model.user_offset.size()) fail("duplicate user token '" + token + "'");
        model.user_offset.push_back(*parsed);
      }
    } else {
      fail("unknown record tag '" + tag + "'");
    }
  }
  if (!have_global) throw DataError("bias model: missing 'g' record");
  return model;
}

}  // namespace cfkit
