// tfa: command-line front end. Flags and an optional --config JSON file are
// merged (flags win) and validated by RunConfig::from_json.

#include "tfa/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <string>

using tfa::cli::FieldType;
using json = nlohmann::json;

namespace {

std::string flag_name(std::string key) {
  for (auto &ch : key)
    if (ch == '_')
      ch = '-';
  return "--" + key;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"time-frequency analysis toolkit"};
  app.set_version_flag("--version", std::string(tfa::cli::tool_version));
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);

  std::map<std::string, std::string> text;
  std::map<std::string, std::vector<double>> lists;
  std::map<std::string, bool> flags;
  std::map<std::string, std::string> chosen;
  std::map<std::string, CLI::App *> subs;

  for (const auto &[module, commands] : tfa::cli::command_table()) {
    CLI::App *sub = app.add_subcommand(module, module + " commands");
    subs[module] = sub;
    sub->add_option("command", chosen[module], "command")
        ->required()
        ->check(CLI::IsMember(commands));
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    for (const auto &f : tfa::cli::field_specs()) {
      const std::string name = flag_name(f.key);
      switch (f.type) {
      case FieldType::RealList:
        sub->add_option(name, lists[f.key], f.help)->delimiter(',');
        break;
      case FieldType::Flag:
        sub->add_flag(name, flags[f.key], f.help);
        break;
      default:
        sub->add_option(name, text[f.key], f.help);
        break;
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  json cfg = json::object();
  if (!config_path.empty()) {
    try {
      cfg = tfa::io::read_json(config_path);
    } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    if (!cfg.is_object()) {
      std::cerr << "error: config: expected a JSON object\n";
      return 1;
    }
  }

  CLI::App *used = nullptr;
  for (auto &[module, sub] : subs)
    if (sub->parsed()) {
      used = sub;
      cfg["module"] = module;
      cfg["command"] = chosen[module];
    }
  if (!used && !cfg.contains("module")) {
    std::cerr << app.help();
    return 1;
  }

  if (used) {
    for (const auto &f : tfa::cli::field_specs()) {
      CLI::Option *opt = used->get_option(flag_name(f.key));
      if (opt->count() == 0)
        continue;
      const std::string path = flag_name(f.key);
      try {
        switch (f.type) {
        case FieldType::Int: {
          std::size_t pos = 0;
          const long v = std::stol(text[f.key], &pos);
          if (pos != text[f.key].size())
            throw std::invalid_argument("trailing characters");
          cfg[f.key] = v;
          break;
        }
        case FieldType::Real: {
          std::size_t pos = 0;
          const double v = std::stod(text[f.key], &pos);
          if (pos != text[f.key].size())
            throw std::invalid_argument("trailing characters");
          cfg[f.key] = v;
          break;
        }
        case FieldType::Text:
          cfg[f.key] = text[f.key];
          break;
        case FieldType::RealList:
          cfg[f.key] = lists[f.key];
          break;
        case FieldType::Flag:
          cfg[f.key] = flags[f.key];
          break;
        }
      } catch (const std::exception &) {
        std::cerr << "error: " << path << ": cannot parse '" << text[f.key] << "'\n";
        return 1;
      }
    }
  }

  tfa::cli::RunConfig rc;
  try {
    rc = tfa::cli::RunConfig::from_json(cfg);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const auto res = tfa::cli::run(rc);
  if (res.exit_code == 1) {
    std::cerr << "error: " << res.message << "\n";
    return 1;
  }
  if (!rc.has("out"))
    std::cout << res.report.dump(2) << "\n";
  for (const auto &f : res.files)
    std::cerr << "wrote " << f << "\n";
  if (res.exit_code == 2)
    std::cerr << "certification failed\n";
  return res.exit_code;
}
