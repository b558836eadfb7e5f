import { ReviewApp } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");
void new ReviewApp(root).start();
