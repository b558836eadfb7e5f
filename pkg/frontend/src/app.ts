import { ApiClient, StaleVersionError, pollWhile } from "./api";
import { buildTree, type TreeNode } from "./tree";
import type { GenerateConfig, ModelResponse, ProjectInfo, Status } from "./types";

interface AppState {
  projects: ProjectInfo[];
  currentProject: ProjectInfo | null;
  current: ModelResponse | null;
  lowConfidence: Set<string>;
  busy: boolean;
  notice: string;
}

const TEMP_DEFAULTS = { class: 0.4, assoc: 0.9, inherit: 0.8 };

export class ReviewApp {
  state: AppState = {
    projects: [],
    currentProject: null,
    current: null,
    lowConfidence: new Set(),
    busy: false,
    notice: "",
  };

  constructor(
    private root: HTMLElement,
    private api: ApiClient = new ApiClient(),
  ) {}

  async start(): Promise<void> {
    await this.refreshProjects();
    this.render();
  }

  async refreshProjects(): Promise<void> {
    this.state.projects = await this.api.listProjects();
  }

  async openProject(id: string): Promise<void> {
    this.state.currentProject = await this.api.getProject(id);
    this.state.lowConfidence = new Set();
    try {
      this.state.current = await this.api.getModel(id);
    } catch {
      this.state.current = null; // nothing generated yet
    }
    this.render();
  }

  private async reloadModel(): Promise<void> {
    if (!this.state.currentProject) return;
    try {
      this.state.current = await this.api.getModel(this.state.currentProject.id);
    } catch {
      this.state.current = null;
    }
  }

  /** Run a mutation; on a version conflict reload and tell the reviewer. */
  private async mutate(action: () => Promise<ModelResponse>): Promise<void> {
    this.state.busy = true;
    this.state.notice = "";
    this.render();
    try {
      this.state.current = await action();
    } catch (error) {
      if (error instanceof StaleVersionError) {
        await this.reloadModel();
        this.state.notice = "The model changed elsewhere; showing the latest version.";
      } else {
        this.state.notice = error instanceof Error ? error.message : String(error);
      }
    } finally {
      this.state.busy = false;
      this.render();
    }
  }

  async generate(config: GenerateConfig): Promise<void> {
    const project = this.state.currentProject;
    if (!project) return;
    await this.mutate(() =>
      pollWhile(
        this.api.generate(project.id, config, this.state.current?.version),
        () => this.reloadModel(),
      ),
    );
  }

  async setStatus(elementId: string, status: Status): Promise<void> {
    const project = this.state.currentProject;
    const current = this.state.current;
    if (!project || !current) return;
    await this.mutate(() =>
      this.api.setStatus(project.id, elementId, status, current.version),
    );
  }

  async regenerate(task: "classes" | "assoc" | "inherit"): Promise<void> {
    const project = this.state.currentProject;
    const current = this.state.current;
    if (!project || !current) return;
    await this.mutate(() =>
      pollWhile(this.api.regenerate(project.id, task, current.version), () =>
        Promise.resolve(),
      ),
    );
  }

  async download(format: "canonical" | "plantuml", acceptedOnly: boolean): Promise<void> {
    const project = this.state.currentProject;
    if (!project) return;
    const text = await this.api.exportDocument(project.id, format, acceptedOnly);
    const extension = format === "canonical" ? "model.json" : "puml";
    const blob = new Blob([text], { type: "text/plain" });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = `${project.name}.${extension}`;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  }

  async attachOracle(oracleDocument: string): Promise<void> {
    const project = this.state.currentProject;
    if (!project || !oracleDocument.trim()) return;
    try {
      const result = await this.api.evaluate(project.id, oracleDocument);
      this.state.lowConfidence = new Set(result.low_confidence.map((p) => p.generated));
      this.state.notice = `${result.low_confidence.length} low-confidence pairing(s) flagged.`;
    } catch (error) {
      this.state.notice = error instanceof Error ? error.message : String(error);
    }
    this.render();
  }

  // ------------------------------------------------------------------ views

  render(): void {
    this.root.replaceChildren(
      this.state.currentProject ? this.renderProject() : this.renderProjectList(),
    );
  }

  private renderProjectList(): HTMLElement {
    const container = el("div", "project-list");
    container.append(el("h1", "", "Domain model review"));

    const list = el("ul", "projects");
    for (const project of this.state.projects) {
      const item = el("li");
      const link = el("a", "project-link", project.name);
      link.setAttribute("href", "#");
      link.addEventListener("click", (event) => {
        event.preventDefault();
        void this.openProject(project.id);
      });
      item.append(link, el("span", "muted", ` ${project.id}`));
      list.append(item);
    }
    container.append(list);

    const form = el("form", "create-form") as HTMLFormElement;
    const name = input("text", "project name", "new-name");
    const description = textarea("system description", "new-description");
    const submit = button("Create project", "create");
    form.append(name, description, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void (async () => {
        if (!name.value.trim()) return;
        await this.api.createProject(name.value.trim(), description.value);
        await this.refreshProjects();
        this.render();
      })();
    });
    container.append(el("h2", "", "New project"), form);
    return container;
  }

  private renderProject(): HTMLElement {
    const project = this.state.currentProject!;
    const container = el("div", "project-page");

    const back = el("a", "back", "< projects");
    back.setAttribute("href", "#");
    back.addEventListener("click", (event) => {
      event.preventDefault();
      this.state.currentProject = null;
      this.state.current = null;
      void this.refreshProjects().then(() => this.render());
    });
    container.append(back, el("h1", "", project.name));

    if (this.state.notice) container.append(el("p", "notice", this.state.notice));
    if (this.state.busy) container.append(el("p", "busy", "working..."));

    container.append(el("h2", "", "Description"));
    const description = textarea("", "description");
    description.value = project.description;
    description.readOnly = true;
    container.append(description);

    container.append(this.renderGenerateForm());

    if (this.state.current) {
      container.append(this.renderTreeSection(), this.renderRegenerate(), this.renderExport());
    } else {
      container.append(el("p", "muted", "No model generated yet."));
    }
    container.append(this.renderOracleSection());
    return container;
  }

  private renderGenerateForm(): HTMLElement {
    const section = el("section", "generate");
    section.append(el("h2", "", "Generate"));
    const mode = select("mode", ["decomposed", "baseline"]);
    const classMode = select("class-mode", ["two_turn", "single_turn"]);
    const relMode = select("rel-mode", ["split", "combined"]);
    const tempClass = numberInput("temp-class", TEMP_DEFAULTS.class);
    const tempAssoc = numberInput("temp-assoc", TEMP_DEFAULTS.assoc);
    const tempInherit = numberInput("temp-inherit", TEMP_DEFAULTS.inherit);
    const go = button("Generate", "generate");
    go.addEventListener("click", () => {
      void this.generate({
        overall_mode: mode.value as GenerateConfig["overall_mode"],
        class_mode: classMode.value as GenerateConfig["class_mode"],
        rel_mode: relMode.value as GenerateConfig["rel_mode"],
        temp_class: Number(tempClass.value),
        temp_assoc: Number(tempAssoc.value),
        temp_inherit: Number(tempInherit.value),
      });
    });
    section.append(
      labelled("mode", mode),
      labelled("classes", classMode),
      labelled("relationships", relMode),
      labelled("class temperature", tempClass),
      labelled("association temperature", tempAssoc),
      labelled("inheritance temperature", tempInherit),
      go,
    );
    return section;
  }

  private renderTreeSection(): HTMLElement {
    const section = el("section", "model-tree");
    section.append(el("h2", "", "Proposed model"));
    const tree = buildTree(this.state.current!.model, this.state.lowConfidence);
    const list = el("ul", "tree");
    for (const group of tree) list.append(this.renderNode(group));
    section.append(list);
    return section;
  }

  private renderNode(node: TreeNode): HTMLElement {
    const item = el("li", "node");
    const row = el("span", "row");
    row.append(el("span", "label", node.label));
    if (node.status !== null) {
      row.append(el("span", `badge badge-${node.status}`, node.status));
      if (node.lowConfidence) row.append(el("span", "flag", "LOW_CONFIDENCE"));
      if (node.id !== null) {
        const accept = button("accept", `accept-${node.id}`);
        const reject = button("reject", `reject-${node.id}`);
        accept.addEventListener("click", () => void this.setStatus(node.id!, "accepted"));
        reject.addEventListener("click", () => void this.setStatus(node.id!, "rejected"));
        row.append(accept, reject);
      }
    }
    item.append(row);
    if (node.children.length) {
      const children = el("ul", "children");
      for (const child of node.children) children.append(this.renderNode(child));
      item.append(children);
    }
    return item;
  }

  private renderRegenerate(): HTMLElement {
    const section = el("section", "regenerate");
    section.append(el("h2", "", "Regenerate"));
    for (const task of ["classes", "assoc", "inherit"] as const) {
      const control = button(`Regenerate ${task}`, `regen-${task}`);
      control.addEventListener("click", () => void this.regenerate(task));
      section.append(control);
    }
    return section;
  }

  private renderExport(): HTMLElement {
    const section = el("section", "export");
    section.append(el("h2", "", "Export"));
    const acceptedToggle = input("checkbox", "", "accepted-only") as HTMLInputElement;
    section.append(labelled("accepted only", acceptedToggle));
    for (const format of ["canonical", "plantuml"] as const) {
      const control = button(`Download ${format}`, `export-${format}`);
      control.addEventListener("click", () =>
        void this.download(format, acceptedToggle.checked),
      );
      section.append(control);
    }
    return section;
  }

  private renderOracleSection(): HTMLElement {
    const section = el("section", "oracle");
    section.append(el("h2", "", "Evaluation oracle"));
    const oracle = textarea("paste an oracle model document", "oracle-doc");
    const attach = button("Evaluate against oracle", "evaluate");
    attach.addEventListener("click", () => void this.attachOracle(oracle.value));
    section.append(oracle, attach);
    return section;
  }
}

// --------------------------------------------------------------- DOM helpers

function el(tag: string, className = "", text = ""): HTMLElement {
  const element = document.createElement(tag);
  if (className) element.className = className;
  if (text) element.textContent = text;
  return element;
}

function input(type: string, placeholder: string, name: string): HTMLInputElement {
  const element = document.createElement("input");
  element.type = type;
  element.placeholder = placeholder;
  element.name = name;
  return element;
}

function numberInput(name: string, value: number): HTMLInputElement {
  const element = input("number", "", name);
  element.step = "0.1";
  element.min = "0";
  element.max = "2";
  element.value = String(value);
  return element;
}

function textarea(placeholder: string, name: string): HTMLTextAreaElement {
  const element = document.createElement("textarea");
  element.placeholder = placeholder;
  element.name = name;
  return element;
}

function button(label: string, name: string): HTMLButtonElement {
  const element = document.createElement("button");
  element.type = "button";
  element.textContent = label;
  element.name = name;
  return element;
}

function select(name: string, options: string[]): HTMLSelectElement {
  const element = document.createElement("select");
  element.name = name;
  for (const option of options) {
    const item = document.createElement("option");
    item.value = option;
    item.textContent = option;
    element.append(item);
  }
  return element;
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const wrapper = el("label", "field");
  wrapper.append(el("span", "field-name", text), control);
  return wrapper;
}
