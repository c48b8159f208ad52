#include "reactor/rules.hpp"

namespace reactor {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string template_to_string(const FactTemplate& f) {
  std::string out = f.name;
  if (f.args.empty()) return out;
  out += "(";
  for (std::size_t i = 0; i < f.args.size(); ++i) {
    if (i > 0) out += ", ";
    if (f.args[i].label) out += *f.args[i].label + ": ";
    out += to_string(f.args[i].value);
  }
  return out + ")";
}

}  // namespace

std::string to_string(const Term& t) {
  return std::visit(Overloaded{
                        [](const Value& v) { return to_string(v); },
                        [](const VarRef& v) { return "?" + v.name; },
                        [](const FieldRef& f) { return "?" + f.var + "." + f.field; },
                    },
                    t);
}

std::string_view to_string(CmpOp op) noexcept {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "=";
}

std::optional<std::string> raised_type(const Action& a) {
  return std::visit(Overloaded{
                        [](const AssertAction& x) -> std::optional<std::string> {
                          return EventTypeId::asserted(x.fact.name).name;
                        },
                        [](const RetractAction& x) -> std::optional<std::string> {
                          return EventTypeId::retracted(x.fact.name).name;
                        },
                        [](const EmitAction& x) -> std::optional<std::string> { return x.type.name; },
                        [](const NoopAction&) -> std::optional<std::string> { return std::nullopt; },
                    },
                    a);
}

std::string to_string(const Action& a) {
  return std::visit(Overloaded{
                        [](const AssertAction& x) { return "assert(" + template_to_string(x.fact) + ")"; },
                        [](const RetractAction& x) { return "retract(" + template_to_string(x.fact) + ")"; },
                        [](const EmitAction& x) {
                          std::string out = "emit(" + x.type.name + ", {";
                          for (std::size_t i = 0; i < x.fields.size(); ++i) {
                            if (i > 0) out += ", ";
                            out += x.fields[i].first + ": " + to_string(x.fields[i].second);
                          }
                          return out + "})";
                        },
                        [](const NoopAction&) { return std::string("noop"); },
                    },
                    a);
}

}  // namespace reactor
