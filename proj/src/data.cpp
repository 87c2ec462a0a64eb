#include "gdm/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace gdm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

// Integer or decimal literal: [+-]digits[.digits] or [+-].digits
bool parse_number(const std::string& s, double& out) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  bool dot = false;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (s[j] >= '0' && s[j] <= '9') {
      ++digits;
    } else if (s[j] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  if (digits == 0) return false;
  const char* first = s.data() + (s[0] == '+' ? 1 : 0);
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct RawRow {
  std::size_t line;
  std::string alt;
  bool chosen;
  bool available;
  std::vector<double> attrs;
};

struct RawTask {
  std::string id;
  std::vector<RawRow> rows;
};

struct RawIndividual {
  std::string id;
  std::size_t first_line;
  std::vector<double> socios;
  std::vector<RawTask> tasks;
  std::unordered_map<std::string, std::size_t> task_index;
};

std::string where(std::size_t line) { return "line " + std::to_string(line); }

}  // namespace

Eigen::Index ChoiceDataset::attribute_index(const std::string& name) const {
  const auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
  return it == attribute_names.end() ? -1 : static_cast<Eigen::Index>(it - attribute_names.begin());
}

Eigen::Index ChoiceDataset::socio_index(const std::string& name) const {
  const auto it = std::find(socio_names.begin(), socio_names.end(), name);
  return it == socio_names.end() ? -1 : static_cast<Eigen::Index>(it - socio_names.begin());
}

bool ChoiceDataset::operator==(const ChoiceDataset& o) const {
  return individual_ids == o.individual_ids && task_ids == o.task_ids &&
         alternative_ids == o.alternative_ids && task_offset == o.task_offset &&
         row_offset == o.row_offset && chosen_row == o.chosen_row && available == o.available &&
         attribute_names == o.attribute_names && socio_names == o.socio_names &&
         attributes.rows() == o.attributes.rows() && attributes.cols() == o.attributes.cols() &&
         attributes == o.attributes && socios.rows() == o.socios.rows() &&
         socios.cols() == o.socios.cols() && socios == o.socios;
}

void validate(const ChoiceDataset& ds) {
  const auto N = ds.n_individuals();
  const auto T = ds.n_tasks();
  const auto R = ds.n_rows();
  if (static_cast<Eigen::Index>(ds.task_offset.size()) != N + 1 ||
      static_cast<Eigen::Index>(ds.row_offset.size()) != T + 1 ||
      static_cast<Eigen::Index>(ds.chosen_row.size()) != T ||
      static_cast<Eigen::Index>(ds.available.size()) != R)
    throw DataError("dataset index arrays have inconsistent sizes");
  if (ds.task_offset.front() != 0 || ds.task_offset.back() != T || ds.row_offset.front() != 0 ||
      ds.row_offset.back() != R)
    throw DataError("dataset offsets do not cover all tasks and rows");
  if (ds.attributes.rows() != R ||
      ds.attributes.cols() != static_cast<Eigen::Index>(ds.attribute_names.size()))
    throw DataError("attribute matrix shape does not match rows x attribute names");
  if (ds.socios.rows() != N || ds.socios.cols() != static_cast<Eigen::Index>(ds.socio_names.size()))
    throw DataError("socio matrix shape does not match individuals x socio names");
  for (Eigen::Index n = 0; n < N; ++n) {
    if (ds.task_offset[n + 1] <= ds.task_offset[n])
      throw DataError("individual '" + ds.individual_ids[n] + "' has no tasks");
    for (Eigen::Index t = ds.task_offset[n]; t < ds.task_offset[n + 1]; ++t) {
      const auto b = ds.row_offset[t], e = ds.row_offset[t + 1];
      const std::string label = "individual '" + ds.individual_ids[n] + "' task '" + ds.task_ids[t] + "'";
      const auto c = ds.chosen_row[t];
      if (c < b || c >= e) throw DataError(label + ": chosen row outside task");
      if (!ds.available[c]) throw DataError(label + ": chosen alternative is unavailable");
      Eigen::Index n_avail = 0;
      for (auto r = b; r < e; ++r) n_avail += ds.available[r] ? 1 : 0;
      if (n_avail < 2) throw DataError(label + ": fewer than 2 available alternatives");
    }
  }
  if (!ds.attributes.allFinite()) throw DataError("non-finite attribute value");
  if (!ds.socios.allFinite()) throw DataError("non-finite socio value");
}

ChoiceDataset parse_dataset(const std::string& csv_text, const ColumnSchema& schema) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: header row required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);

  auto column = [&](const std::string& name, const char* role) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError(std::string("missing ") + role + " column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = column(schema.id, "id");
  const std::size_t c_task = column(schema.task, "task");
  const std::size_t c_alt = column(schema.alternative, "alternative");
  const std::size_t c_choice = column(schema.choice, "choice");
  const bool has_avail = !schema.availability.empty();
  const std::size_t c_avail = has_avail ? column(schema.availability, "availability") : 0;

  std::vector<std::string> socio_names = schema.socios;
  std::vector<std::size_t> c_socios;
  for (const auto& s : socio_names) c_socios.push_back(column(s, "socio"));

  std::vector<std::string> attr_names = schema.attributes;
  if (attr_names.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      const bool taken = j == c_id || j == c_task || j == c_alt || j == c_choice ||
                         (has_avail && j == c_avail) ||
                         std::find(c_socios.begin(), c_socios.end(), j) != c_socios.end();
      if (!taken) attr_names.push_back(header[j]);
    }
  }
  std::vector<std::size_t> c_attrs;
  for (const auto& a : attr_names) c_attrs.push_back(column(a, "attribute"));

  std::vector<RawIndividual> people;
  std::unordered_map<std::string, std::size_t> person_index;
  std::size_t line_no = 1;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw DataError(where(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(f.size()));

    auto number = [&](std::size_t col) {
      double v = 0;
      if (!parse_number(f[col], v))
        throw DataError(where(line_no) + ": non-numeric value '" + f[col] + "' in column '" +
                        header[col] + "'");
      return v;
    };
    auto flag = [&](std::size_t col) {
      const double v = number(col);
      if (v != 0.0 && v != 1.0)
        throw DataError(where(line_no) + ": column '" + header[col] + "' must be 0 or 1");
      return v == 1.0;
    };

    RawRow row;
    row.line = line_no;
    row.alt = f[c_alt];
    row.chosen = flag(c_choice);
    row.available = has_avail ? flag(c_avail) : true;
    row.attrs.reserve(c_attrs.size());
    for (auto c : c_attrs) row.attrs.push_back(number(c));
    std::vector<double> socios;
    for (auto c : c_socios) socios.push_back(number(c));

    auto [pit, fresh] = person_index.try_emplace(f[c_id], people.size());
    if (fresh) people.push_back({f[c_id], line_no, socios, {}, {}});
    RawIndividual& person = people[pit->second];
    if (!fresh && person.socios != socios)
      throw DataError(where(line_no) + ": socio values differ from line " +
                      std::to_string(person.first_line) + " for individual '" + person.id + "'");

    auto [tit, tfresh] = person.task_index.try_emplace(f[c_task], person.tasks.size());
    if (tfresh) person.tasks.push_back({f[c_task], {}});
    RawTask& task = person.tasks[tit->second];
    for (const auto& other : task.rows)
      if (other.alt == row.alt)
        throw DataError(where(line_no) + ": duplicate (id, task, alt) = (" + person.id + ", " +
                        task.id + ", " + row.alt + ") first seen on " + where(other.line));
    task.rows.push_back(std::move(row));
    ++n_rows;
  }
  if (people.empty()) throw DataError("no data rows");

  ChoiceDataset ds;
  ds.attribute_names = attr_names;
  ds.socio_names = socio_names;
  ds.attributes.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(attr_names.size()));
  ds.socios.resize(static_cast<Eigen::Index>(people.size()), static_cast<Eigen::Index>(socio_names.size()));
  ds.task_offset.push_back(0);
  ds.row_offset.push_back(0);
  Eigen::Index r = 0;
  for (std::size_t n = 0; n < people.size(); ++n) {
    const auto& person = people[n];
    ds.individual_ids.push_back(person.id);
    for (std::size_t l = 0; l < person.socios.size(); ++l)
      ds.socios(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)) = person.socios[l];
    for (const auto& task : person.tasks) {
      Eigen::Index chosen = -1;
      std::size_t chosen_line = 0;
      Eigen::Index n_avail = 0;
      for (const auto& row : task.rows) {
        if (row.chosen) {
          if (chosen >= 0)
            throw DataError(where(row.line) + ": multiple chosen alternatives in task (" + person.id +
                            ", " + task.id + "), first on " + where(chosen_line));
          if (!row.available)
            throw DataError(where(row.line) + ": chosen alternative is unavailable");
          chosen = r;
          chosen_line = row.line;
        }
        n_avail += row.available ? 1 : 0;
        ds.alternative_ids.push_back(row.alt);
        ds.available.push_back(row.available ? 1 : 0);
        for (std::size_t k = 0; k < row.attrs.size(); ++k)
          ds.attributes(r, static_cast<Eigen::Index>(k)) = row.attrs[k];
        ++r;
      }
      if (chosen < 0)
        throw DataError(where(task.rows.front().line) + ": no chosen alternative in task (" +
                        person.id + ", " + task.id + ")");
      if (n_avail < 2)
        throw DataError(where(task.rows.front().line) + ": fewer than 2 available alternatives in task (" +
                        person.id + ", " + task.id + ")");
      ds.task_ids.push_back(task.id);
      ds.chosen_row.push_back(chosen);
      ds.row_offset.push_back(r);
    }
    ds.task_offset.push_back(static_cast<Eigen::Index>(ds.task_ids.size()));
  }
  validate(ds);
  return ds;
}

ChoiceDataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), schema);
}

std::string format_decimal(double value) {
  if (value == 0.0) return "0";
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (res.ec != std::errc()) throw DataError("cannot format value");
  return std::string(buf, res.ptr);
}

namespace {
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}
}  // namespace

std::string format_dataset(const ChoiceDataset& ds) {
  std::string out = "id,task,alt,choice,avail";
  for (const auto& a : ds.attribute_names) out += "," + csv_field(a);
  for (const auto& s : ds.socio_names) out += "," + csv_field(s);
  out += '\n';
  for (Eigen::Index n = 0; n < ds.n_individuals(); ++n) {
    for (auto t = ds.task_offset[n]; t < ds.task_offset[n + 1]; ++t) {
      for (auto r = ds.row_offset[t]; r < ds.row_offset[t + 1]; ++r) {
        out += csv_field(ds.individual_ids[n]);
        out += ',' + csv_field(ds.task_ids[t]);
        out += ',' + csv_field(ds.alternative_ids[r]);
        out += ds.chosen_row[t] == r ? ",1" : ",0";
        out += ds.available[r] ? ",1" : ",0";
        for (Eigen::Index k = 0; k < ds.attributes.cols(); ++k)
          out += ',' + format_decimal(ds.attributes(r, k));
        for (Eigen::Index l = 0; l < ds.socios.cols(); ++l)
          out += ',' + format_decimal(ds.socios(n, l));
        out += '\n';
      }
    }
  }
  return out;
}

void write_dataset(const ChoiceDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file '" + path.string() + "'");
  out << format_dataset(ds);
  if (!out) throw IoError("error writing dataset file '" + path.string() + "'");
}

ColumnSchema canonical_schema(const ChoiceDataset& ds) {
  ColumnSchema s;
  s.availability = "avail";
  s.attributes = ds.attribute_names;
  s.socios = ds.socio_names;
  return s;
}

std::uint64_t content_hash(const ChoiceDataset& ds) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : format_dataset(ds)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ChoiceDataset make_regular_dataset(Eigen::Index n_individuals, Eigen::Index n_tasks,
                                   Eigen::Index n_alternatives,
                                   std::vector<std::string> attribute_names,
                                   std::vector<std::string> socio_names) {
  ChoiceDataset ds;
  ds.attribute_names = std::move(attribute_names);
  ds.socio_names = std::move(socio_names);
  ds.task_offset.push_back(0);
  ds.row_offset.push_back(0);
  Eigen::Index r = 0;
  for (Eigen::Index n = 0; n < n_individuals; ++n) {
    ds.individual_ids.push_back(std::to_string(n + 1));
    for (Eigen::Index s = 0; s < n_tasks; ++s) {
      ds.task_ids.push_back(std::to_string(s + 1));
      ds.chosen_row.push_back(r);
      for (Eigen::Index j = 0; j < n_alternatives; ++j, ++r) {
        ds.alternative_ids.push_back(std::to_string(j + 1));
        ds.available.push_back(1);
      }
      ds.row_offset.push_back(r);
    }
    ds.task_offset.push_back(static_cast<Eigen::Index>(ds.task_ids.size()));
  }
  ds.attributes = Eigen::MatrixXd::Zero(r, static_cast<Eigen::Index>(ds.attribute_names.size()));
  ds.socios = Eigen::MatrixXd::Zero(n_individuals, static_cast<Eigen::Index>(ds.socio_names.size()));
  return ds;
}

}  // namespace gdm
