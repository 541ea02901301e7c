#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epsbeta/analysis.hpp"
#include "epsbeta/infiltration.hpp"
#include "epsbeta/measures.hpp"
#include "epsbeta/surgery.hpp"

namespace epsbeta {

nlohmann::json to_json(const Point& p);
nlohmann::json to_json(const Box& b);
nlohmann::json to_json(const Ball& b);
nlohmann::json to_json(const std::vector<Check>& checks);
nlohmann::json to_json(const MeasureReport& r);
nlohmann::json to_json(const FlatnessStats& s);
nlohmann::json to_json(const SurgeryPlan& p);
nlohmann::json to_json(const TransferBound& b);
nlohmann::json to_json(const AdjustReport& r);
nlohmann::json to_json(const InBallReport& r);
nlohmann::json to_json(const InfiltrationReport& r);
nlohmann::json to_json(const RequiredK& r);
nlohmann::json to_json(const CperCurve& c);
nlohmann::json to_json(const TruncationTrace& t);

/// Non-finite numbers become the strings "inf", "-inf" or "nan".
nlohmann::json finite_or_tag(double v);

/// Pretty JSON with a trailing newline.
void write_json(const nlohmann::json& j, const std::string& path);

/// CSV with a header row; numbers printed with 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
std::string format17(double v);

}  // namespace epsbeta
